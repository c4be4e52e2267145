use serkit::features_io::{read_features, write_features, FeatureLayout};
use serkit::pipeline::{extract_all, Extracted};
use serkit::provenance::{sha256_hex, Provenance};
use serkit::synth::{corpus_plan, synthesize, write_corpus, SynthConfig};
use serkit_core::audio::mean_abs_amplitude;
use serkit_core::experiments::{parse_synthetic, Emotion, Gender, Language};
use serkit_core::features::{FeatureConfig, FeatureKind, FeatureVector};

#[test]
fn sha256_of_known_input() {
    assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#[test]
fn provenance_hash_follows_config() {
    let a = Provenance::new("experiment", 1, &("mono", 5));
    let b = Provenance::new("experiment", 1, &("mono", 5));
    let c = Provenance::new("experiment", 1, &("mono", 6));
    assert_eq!(a, b);
    assert_ne!(a.config_sha256, c.config_sha256);
    assert!(a.comment_header("# ").lines().all(|l| l.starts_with("# ")));
}

#[test]
fn synthetic_clips_are_deterministic_and_distinct() {
    let cfg = SynthConfig { seed: 4, ..SynthConfig::default() };
    let a = synthesize(&cfg, Language::SyntheticA, Gender::Female, Emotion::Fear, 0);
    assert_eq!(a, synthesize(&cfg, Language::SyntheticA, Gender::Female, Emotion::Fear, 0));
    assert_ne!(a.samples, synthesize(&cfg, Language::SyntheticA, Gender::Female, Emotion::Fear, 1).samples);
    let other = SynthConfig { seed: 5, ..cfg.clone() };
    assert_ne!(a.samples, synthesize(&other, Language::SyntheticA, Gender::Female, Emotion::Fear, 0).samples);
    assert!(a.samples.iter().all(|v| v.abs() <= 1.0));
    assert!(mean_abs_amplitude(&a) > 0.01);
    assert_eq!(corpus_plan(&cfg).len(), 2 * 2 * 6 * 6);
}

#[test]
fn synthetic_file_names_parse_back() {
    let cfg = SynthConfig { takes: 1, duration_secs: 0.3, languages: vec![Language::SyntheticB], ..SynthConfig::default() };
    let dir = tempfile::tempdir().unwrap();
    let written = write_corpus(dir.path(), &cfg).unwrap();
    assert_eq!(written.len(), 12);
    for u in &written {
        assert_eq!(u.language, Language::SyntheticB);
        assert_eq!(parse_synthetic(&u.path).unwrap(), *u);
        assert!(dir.path().join(&u.path).is_file());
    }
    assert!(write_corpus(dir.path(), &SynthConfig { languages: vec![Language::German], ..cfg }).is_err());
}

#[test]
fn feature_files_round_trip_exactly() {
    let cfg = SynthConfig { takes: 1, duration_secs: 0.4, languages: vec![Language::SyntheticA], ..SynthConfig::default() };
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), &cfg).unwrap();
    let utterances = serkit::manifest::read_manifest(&dir.path().join("manifest.jsonl")).unwrap();
    let kinds = [FeatureKind::Mfcc, FeatureKind::Zcr, FeatureKind::Tonnetz];
    let extraction = extract_all(&utterances, &kinds, &FeatureConfig::default()).unwrap();
    let layout = FeatureLayout {
        kinds: kinds.to_vec(),
        entries: extraction.rows[0].features.layout.clone(),
        vector_len: 27,
        sample_rate: 22_050,
        config: FeatureConfig::default(),
        rows: extraction.rows.len(),
        provenance: Provenance::new("extract", 0, &"test"),
    };
    let path = dir.path().join("out/features.tsv");
    write_features(&path, &extraction.rows, &layout).unwrap();
    let (back_layout, rows) = read_features(&path).unwrap();
    assert_eq!(back_layout, layout);
    assert_eq!(rows.len(), extraction.rows.len());
    for Extracted { utterance, features, .. } in &extraction.rows {
        let got: &FeatureVector = &rows[&utterance.path];
        assert_eq!(got.len(), 27);
        let bits = |v: &FeatureVector| v.values.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(got), bits(features));
    }
}
