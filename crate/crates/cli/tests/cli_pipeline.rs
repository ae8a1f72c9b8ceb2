//! End-to-end checks of the CLI surface: exit codes, error reporting, and
//! determinism of the pipeline stages.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vaani"))
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini_corpus")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn vaani")
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn usage_error_exits_2() {
    let out = run(&["recipe", "--stage", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ingest_empty_dir_writes_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty");
    std::fs::create_dir(&input).unwrap();
    let manifest = dir.path().join("out/corpus.jsonl");
    let out = run(&[
        "ingest",
        "--input-dir",
        &path_str(&input),
        "--out-manifest",
        &path_str(&manifest),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&manifest).unwrap(), "");
}

#[test]
fn ingest_reports_corrupt_file_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    // Two good files from the bundled corpus plus one corrupt WAV.
    for id in ["u03_english_default", "u04_english_sad"] {
        std::fs::copy(corpus_dir().join(format!("{id}.wav")), input.join(format!("{id}.wav")))
            .unwrap();
        std::fs::copy(
            corpus_dir().join(format!("{id}.json")),
            input.join(format!("{id}.json")),
        )
        .unwrap();
    }
    std::fs::write(input.join("broken.wav"), b"this is not a wav file at all").unwrap();
    std::fs::write(input.join("broken.txt"), "some words").unwrap();

    let manifest = dir.path().join("out/corpus.jsonl");
    let out = run(&[
        "ingest",
        "--input-dir",
        &path_str(&input),
        "--out-manifest",
        &path_str(&manifest),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("broken"), "stderr: {stderr}");
    // The two good records still land in the manifest.
    let manifest_text = std::fs::read_to_string(&manifest).unwrap();
    assert_eq!(manifest_text.lines().count(), 2);
}

#[test]
fn describe_requires_tags() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("corpus.jsonl");
    let out = run(&[
        "ingest",
        "--input-dir",
        &path_str(&corpus_dir()),
        "--out-manifest",
        &path_str(&manifest),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let described = dir.path().join("described.jsonl");
    let out = run(&[
        "describe",
        "--manifest",
        &path_str(&manifest),
        "--out",
        &path_str(&described),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no tags"), "stderr: {stderr}");
    assert!(!described.exists());
}

#[test]
fn tag_fails_before_processing_on_missing_bin_edges() {
    let out = run(&[
        "tag",
        "--manifest",
        "does-not-matter.jsonl",
        "--out",
        "out.jsonl",
        "--bin-edges",
        "no/such/file.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bin edges"), "stderr: {stderr}");
}

#[test]
fn tag_lists_silent_record_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    std::fs::copy(
        corpus_dir().join("u03_english_default.wav"),
        input.join("good.wav"),
    )
    .unwrap();
    std::fs::write(input.join("good.txt"), "a perfectly fine sentence").unwrap();
    // One second of digital silence.
    let silent = vaani::audio_io::AudioBuffer::new(vec![0.0; 16000], 16000);
    vaani::audio_io::write_wav(&silent, input.join("silent.wav")).unwrap();
    std::fs::write(input.join("silent.txt"), "this one is silent").unwrap();

    let manifest = dir.path().join("corpus.jsonl");
    let out = run(&[
        "ingest",
        "--input-dir",
        &path_str(&input),
        "--out-manifest",
        &path_str(&manifest),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let tagged = dir.path().join("tagged.jsonl");
    let out = run(&[
        "tag",
        "--manifest",
        &path_str(&manifest),
        "--out",
        &path_str(&tagged),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("silent"), "stderr: {stderr}");
    assert!(!tagged.exists());
}

#[test]
fn translit_round_trip_reports_identity() {
    let words = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/hindi_words_200.txt");
    let out = run(&["translit", "--file", &path_str(&words), "--round-trip"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("100.0% (200/200)"), "stdout: {stdout}");
}

#[test]
fn translit_reports_offsets_on_bad_input() {
    let out = run(&["translit", "--text", "नमxस्ते", "--to-latin"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("offset 2"), "stderr: {stderr}");
}

#[test]
fn eval_names_missing_hypothesis_id() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("corpus.jsonl");
    let out = run(&[
        "ingest",
        "--input-dir",
        &path_str(&corpus_dir()),
        "--out-manifest",
        &path_str(&manifest),
    ]);
    assert_eq!(out.status.code(), Some(0));

    // Hypothesis dir missing one id.
    let hyp = dir.path().join("hyp");
    std::fs::create_dir(&hyp).unwrap();
    for id in [
        "u01_hindi_default",
        "u02_hindi_happy",
        "u03_english_default",
        "u04_english_sad",
        "u05_mixed_emphasis",
    ] {
        std::fs::copy(
            dir.path().join("audio").join(format!("{id}.wav")),
            hyp.join(format!("{id}.wav")),
        )
        .unwrap();
    }
    let out = run(&[
        "eval",
        "--ref-manifest",
        &path_str(&manifest),
        "--hyp-audio-dir",
        &path_str(&hyp),
        "--out-prefix",
        &path_str(&dir.path().join("report")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("u06_hindi_laughing"), "stderr: {stderr}");
}

#[test]
fn describe_accepts_custom_template_file() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("corpus.jsonl");
    assert_eq!(
        run(&[
            "ingest",
            "--input-dir",
            &path_str(&corpus_dir()),
            "--out-manifest",
            &path_str(&manifest),
        ])
        .status
        .code(),
        Some(0)
    );
    let tagged = dir.path().join("tagged.jsonl");
    assert_eq!(
        run(&["tag", "--manifest", &path_str(&manifest), "--out", &path_str(&tagged)])
            .status
            .code(),
        Some(0)
    );
    let template = dir.path().join("template.json");
    std::fs::write(
        &template,
        r#"{"name": "custom", "clauses": [
            {"variants": ["Recording of {speaker}: {snr_db} audio, {duration} clip."]}
        ]}"#,
    )
    .unwrap();
    let out_path = dir.path().join("described.jsonl");
    let out = run(&[
        "describe",
        "--manifest",
        &path_str(&tagged),
        "--out",
        &path_str(&out_path),
        "--template",
        &path_str(&template),
        "--speaker-name",
        "Isha",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("Recording of Isha:"), "{text}");

    // A template referencing an absent label fails naming the slot.
    std::fs::write(
        &template,
        r#"{"name": "bad", "clauses": [{"variants": ["{pitch} voice"]}]}"#,
    )
    .unwrap();
    let out = run(&[
        "describe",
        "--manifest",
        &path_str(&tagged),
        "--out",
        &path_str(&out_path),
        "--template",
        &path_str(&template),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pitch"));
}

#[test]
fn eval_merges_external_pesq_column() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("corpus.jsonl");
    assert_eq!(
        run(&[
            "ingest",
            "--input-dir",
            &path_str(&corpus_dir()),
            "--out-manifest",
            &path_str(&manifest),
        ])
        .status
        .code(),
        Some(0)
    );
    let external = dir.path().join("pesq.csv");
    let mut csv = String::from("id,pesq\n");
    for id in [
        "u01_hindi_default",
        "u02_hindi_happy",
        "u03_english_default",
        "u04_english_sad",
        "u05_mixed_emphasis",
        "u06_hindi_laughing",
    ] {
        csv.push_str(&format!("{id},3.5\n"));
    }
    std::fs::write(&external, csv).unwrap();
    let out = run(&[
        "eval",
        "--ref-manifest",
        &path_str(&manifest),
        "--hyp-manifest",
        &path_str(&manifest),
        "--out-prefix",
        &path_str(&dir.path().join("report")),
        "--external-csv",
        &path_str(&external),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let group = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    for line in group.lines().skip(1) {
        let pesq_field = line.split(',').nth(6).unwrap();
        assert_eq!(pesq_field, "3.5", "line: {line}");
    }
    let long = std::fs::read_to_string(dir.path().join("report_long.csv")).unwrap();
    assert!(long.contains(",pesq,3.5"));
}

#[test]
fn strict_mode_promotes_diagnostics_to_failures() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    std::fs::copy(
        corpus_dir().join("u03_english_default.wav"),
        input.join("wordy.wav"),
    )
    .unwrap();
    // A 2 s clip cannot plausibly carry a 500-phoneme transcript.
    std::fs::write(input.join("wordy.txt"), vec!["ka"; 500].join(" ")).unwrap();

    let manifest = dir.path().join("corpus.jsonl");
    let lenient = run(&[
        "ingest",
        "--input-dir",
        &path_str(&input),
        "--out-manifest",
        &path_str(&manifest),
    ]);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("speaking rate"));

    let strict = run(&[
        "--strict",
        "ingest",
        "--input-dir",
        &path_str(&input),
        "--out-manifest",
        &path_str(&manifest),
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn codec_reconstruction_mcd_is_finite_and_improves_with_levels() {
    use vaani::dsp::{mel_spectrogram, mfcc, stft};

    let buf = vaani::audio_io::read_wav(corpus_dir().join("u03_english_default.wav")).unwrap();
    let spec = stft(&buf, 2048, 512).unwrap();
    let mel = mel_spectrogram(&spec, 80, 0.0, buf.sample_rate as f64 / 2.0);

    let mut mcds = Vec::new();
    for levels in [1usize, 4] {
        let cb = vaani::codec::train_rvq(&mel, levels, 64, 100, 3).unwrap();
        let codes = vaani::codec::encode(&mel, &cb).unwrap();
        let recon = vaani::codec::decode(&codes, &cb).unwrap();
        let original = mfcc(&mel, 13, buf.sample_rate, 512);
        let quantized = mfcc(&recon, 13, buf.sample_rate, 512);
        let distortion = vaani::metrics::mcd(&original, &quantized, false).unwrap();
        assert!(distortion.is_finite(), "{levels}-level MCD is {distortion}");
        mcds.push(distortion);
    }
    assert!(
        mcds[1] < mcds[0],
        "4-level reconstruction should beat 1 level: {mcds:?}"
    );
}

#[test]
fn describe_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("corpus.jsonl");
    assert_eq!(
        run(&[
            "ingest",
            "--input-dir",
            &path_str(&corpus_dir()),
            "--out-manifest",
            &path_str(&manifest),
        ])
        .status
        .code(),
        Some(0)
    );
    let tagged = dir.path().join("tagged.jsonl");
    assert_eq!(
        run(&["tag", "--manifest", &path_str(&manifest), "--out", &path_str(&tagged)])
            .status
            .code(),
        Some(0)
    );
    let d1 = dir.path().join("d1.jsonl");
    let d2 = dir.path().join("d2.jsonl");
    for out_path in [&d1, &d2] {
        assert_eq!(
            run(&[
                "describe",
                "--manifest",
                &path_str(&tagged),
                "--out",
                &path_str(out_path),
                "--speaker-name",
                "Akshansh",
                "--seed",
                "7",
            ])
            .status
            .code(),
            Some(0)
        );
    }
    assert_eq!(
        std::fs::read(&d1).unwrap(),
        std::fs::read(&d2).unwrap(),
        "describe output must be byte-identical across reruns"
    );
    let text = std::fs::read_to_string(&d1).unwrap();
    assert!(text.matches("Akshansh").count() >= 6);
}
