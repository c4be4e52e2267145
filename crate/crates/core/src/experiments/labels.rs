//! Corpus identities, filename conventions and label schemes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    Ravdess,
    Emodb,
    Emovo,
    Synthetic,
}

impl Dataset {
    pub const CORPORA: [Dataset; 3] = [Dataset::Ravdess, Dataset::Emodb, Dataset::Emovo];

    pub fn id(self) -> &'static str {
        match self {
            Dataset::Ravdess => "ravdess",
            Dataset::Emodb => "emodb",
            Dataset::Emovo => "emovo",
            Dataset::Synthetic => "synthetic",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Dataset::Ravdess => "RAVDESS",
            Dataset::Emodb => "EMO-DB",
            Dataset::Emovo => "EMOVO",
            Dataset::Synthetic => "Synthetic",
        }
    }

    /// Language of every recording in the corpus, if it has only one.
    pub fn language(self) -> Option<Language> {
        match self {
            Dataset::Ravdess => Some(Language::English),
            Dataset::Emodb => Some(Language::German),
            Dataset::Emovo => Some(Language::Italian),
            Dataset::Synthetic => None,
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Dataset {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ravdess" => Ok(Dataset::Ravdess),
            "emodb" => Ok(Dataset::Emodb),
            "emovo" => Ok(Dataset::Emovo),
            "synthetic" | "synth" => Ok(Dataset::Synthetic),
            _ => Err(ExperimentError::InvalidSpec(format!("unknown dataset `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    English,
    German,
    Italian,
    /// First language of the synthetic corpus.
    SyntheticA,
    /// Second language of the synthetic corpus.
    SyntheticB,
}

impl Language {
    pub fn id(self) -> &'static str {
        match self {
            Language::English => "english",
            Language::German => "german",
            Language::Italian => "italian",
            Language::SyntheticA => "synthetic_a",
            Language::SyntheticB => "synthetic_b",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Language::English => "English",
            Language::German => "German",
            Language::Italian => "Italian",
            Language::SyntheticA => "Synthetic-A",
            Language::SyntheticB => "Synthetic-B",
        }
    }

    /// Short column tag used in rendered tables.
    pub fn short(self) -> &'static str {
        match self {
            Language::English => "Eng.",
            Language::German => "Ger.",
            Language::Italian => "Ita.",
            Language::SyntheticA => "Syn-A",
            Language::SyntheticB => "Syn-B",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Language {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "english" | "en" | "ravdess" => Ok(Language::English),
            "german" | "de" | "emodb" | "emo_db" => Ok(Language::German),
            "italian" | "it" | "emovo" => Ok(Language::Italian),
            "synthetic_a" | "a" => Ok(Language::SyntheticA),
            "synthetic_b" | "b" => Ok(Language::SyntheticB),
            _ => Err(ExperimentError::InvalidSpec(format!("unknown language `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Male, Gender::Female];

    pub fn label(self) -> &'static str {
        match self {
            Gender::Male => "Male",
            Gender::Female => "Female",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Fear,
    Joy,
    Sadness,
    Disgust,
    Surprise,
    Neutral,
    Boredom,
    /// Raw RAVDESS code, merged into [`Emotion::Neutral`] by [`map_labels`].
    Calm,
}

impl Emotion {
    /// Labels shared by all three corpora after mapping.
    pub const SHARED: [Emotion; 6] =
        [Emotion::Anger, Emotion::Fear, Emotion::Joy, Emotion::Sadness, Emotion::Disgust, Emotion::Neutral];

    pub fn label(self) -> &'static str {
        match self {
            Emotion::Anger => "Anger",
            Emotion::Fear => "Fear",
            Emotion::Joy => "Joy",
            Emotion::Sadness => "Sadness",
            Emotion::Disgust => "Disgust",
            Emotion::Surprise => "Surprise",
            Emotion::Neutral => "Neutral",
            Emotion::Boredom => "Boredom",
            Emotion::Calm => "Calm",
        }
    }

    pub fn is_shared(self) -> bool {
        Self::SHARED.contains(&self)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub path: String,
    pub dataset: Dataset,
    pub language: Language,
    pub speaker_id: String,
    pub gender: Gender,
    pub emotion: Emotion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<String>,
}

impl Utterance {
    /// Class name under the given label mode.
    pub fn class_label(&self, mode: LabelMode) -> String {
        match mode {
            LabelMode::Emotion => self.emotion.label().to_string(),
            LabelMode::GenderEmotion => compound_label(self.gender, self.emotion),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    Emotion,
    GenderEmotion,
}

pub fn compound_label(gender: Gender, emotion: Emotion) -> String {
    format!("{}-{}", gender.label(), emotion.label())
}

/// Why a file was not turned into an utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    /// The name does not follow the corpus convention.
    Unrecognized(String),
    /// The name is valid but the recording is excluded (e.g. sung material).
    Excluded(String),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::Unrecognized(m) => write!(f, "unrecognized filename: {m}"),
            SkipReason::Excluded(m) => write!(f, "excluded: {m}"),
        }
    }
}

fn file_stem(path: &str) -> Result<&str, SkipReason> {
    let name = path.rsplit(['/', '\\']).next().unwrap_or(path);
    match name.rsplit_once('.') {
        Some((stem, ext)) if ext.eq_ignore_ascii_case("wav") => Ok(stem),
        _ => Err(SkipReason::Unrecognized(format!("{name}: not a .wav file"))),
    }
}

fn two_digits(s: &str) -> Option<u32> {
    (s.len() == 2 && s.bytes().all(|b| b.is_ascii_digit())).then(|| s.parse().ok()).flatten()
}

/// Parse a file path following the naming convention of `dataset`.
pub fn parse_filename(dataset: Dataset, path: &str) -> Result<Utterance, SkipReason> {
    match dataset {
        Dataset::Ravdess => parse_ravdess(path),
        Dataset::Emodb => parse_emodb(path),
        Dataset::Emovo => parse_emovo(path),
        Dataset::Synthetic => parse_synthetic(path),
    }
}

/// `MM-VV-EE-II-SS-RR-AA.wav`; only vocal channel 01 (speech) is kept.
pub fn parse_ravdess(path: &str) -> Result<Utterance, SkipReason> {
    let stem = file_stem(path)?;
    let bad = || SkipReason::Unrecognized(format!("{stem}: expected MM-VV-EE-II-SS-RR-AA"));
    let parts: Vec<u32> = stem.split('-').map(two_digits).collect::<Option<Vec<_>>>().ok_or_else(bad)?;
    let [_modality, channel, emotion, intensity, _statement, _repetition, actor] = parts[..] else {
        return Err(bad());
    };
    let emotion = match emotion {
        1 => Emotion::Neutral,
        2 => Emotion::Calm,
        3 => Emotion::Joy,
        4 => Emotion::Sadness,
        5 => Emotion::Anger,
        6 => Emotion::Fear,
        7 => Emotion::Disgust,
        8 => Emotion::Surprise,
        _ => return Err(bad()),
    };
    let intensity = match intensity {
        1 => "normal",
        2 => "strong",
        _ => return Err(bad()),
    };
    match channel {
        1 => {}
        2 => return Err(SkipReason::Excluded(format!("{stem}: song"))),
        _ => return Err(bad()),
    }
    if !(1..=24).contains(&actor) {
        return Err(bad());
    }
    Ok(Utterance {
        path: path.to_string(),
        dataset: Dataset::Ravdess,
        language: Language::English,
        speaker_id: format!("{actor:02}"),
        gender: if actor % 2 == 1 { Gender::Male } else { Gender::Female },
        emotion,
        intensity: Some(intensity.to_string()),
    })
}

/// `SSTTTEV.wav`: speaker, text code, emotion letter, version.
pub fn parse_emodb(path: &str) -> Result<Utterance, SkipReason> {
    let stem = file_stem(path)?;
    let bad = || SkipReason::Unrecognized(format!("{stem}: expected SSTTTEV"));
    let b = stem.as_bytes();
    if b.len() != 7 || !stem.is_ascii() {
        return Err(bad());
    }
    let speaker = &stem[0..2];
    let gender = match two_digits(speaker).ok_or_else(bad)? {
        3 | 10 | 11 | 12 | 15 => Gender::Male,
        8 | 9 | 13 | 14 | 16 => Gender::Female,
        _ => return Err(bad()),
    };
    let emotion = match b[5] {
        b'W' => Emotion::Anger,
        b'L' => Emotion::Boredom,
        b'E' => Emotion::Disgust,
        b'A' => Emotion::Fear,
        b'F' => Emotion::Joy,
        b'T' => Emotion::Sadness,
        b'N' => Emotion::Neutral,
        _ => return Err(bad()),
    };
    Ok(Utterance {
        path: path.to_string(),
        dataset: Dataset::Emodb,
        language: Language::German,
        speaker_id: speaker.to_string(),
        gender,
        emotion,
        intensity: None,
    })
}

/// `emo-spk-sent.wav`, e.g. `dis-f1-b1.wav`.
pub fn parse_emovo(path: &str) -> Result<Utterance, SkipReason> {
    let stem = file_stem(path)?;
    let bad = || SkipReason::Unrecognized(format!("{stem}: expected emo-spk-sent"));
    let lower = stem.to_ascii_lowercase();
    let parts: Vec<&str> = lower.split('-').collect();
    let [emo, speaker, sentence] = parts[..] else {
        return Err(bad());
    };
    let emotion = match emo {
        "rab" => Emotion::Anger,
        "pau" => Emotion::Fear,
        "gio" => Emotion::Joy,
        "tri" => Emotion::Sadness,
        "dis" => Emotion::Disgust,
        "sor" => Emotion::Surprise,
        "neu" => Emotion::Neutral,
        _ => return Err(bad()),
    };
    let gender = match speaker {
        "m1" | "m2" | "m3" => Gender::Male,
        "f1" | "f2" | "f3" => Gender::Female,
        _ => return Err(bad()),
    };
    if sentence.is_empty() {
        return Err(bad());
    }
    Ok(Utterance {
        path: path.to_string(),
        dataset: Dataset::Emovo,
        language: Language::Italian,
        speaker_id: speaker.to_string(),
        gender,
        emotion,
        intensity: None,
    })
}

/// Name of a generated clip: `syn-<a|b>-<m|f>-<emotion>-<take>.wav`.
pub fn synthetic_filename(language: Language, gender: Gender, emotion: Emotion, take: usize) -> String {
    let lang = if language == Language::SyntheticB { "b" } else { "a" };
    let g = if gender == Gender::Male { "m" } else { "f" };
    format!("syn-{lang}-{g}-{}-{take:03}.wav", emotion.label().to_ascii_lowercase())
}

pub fn parse_synthetic(path: &str) -> Result<Utterance, SkipReason> {
    let stem = file_stem(path)?;
    let bad = || SkipReason::Unrecognized(format!("{stem}: expected syn-L-G-emotion-take"));
    let parts: Vec<&str> = stem.split('-').collect();
    let ["syn", lang, g, emo, take] = parts[..] else {
        return Err(bad());
    };
    let language = match lang {
        "a" => Language::SyntheticA,
        "b" => Language::SyntheticB,
        _ => return Err(bad()),
    };
    let gender = match g {
        "m" => Gender::Male,
        "f" => Gender::Female,
        _ => return Err(bad()),
    };
    let emotion = Emotion::SHARED.iter().copied().find(|e| e.label().eq_ignore_ascii_case(emo)).ok_or_else(bad)?;
    take.parse::<usize>().map_err(|_| bad())?;
    Ok(Utterance {
        path: path.to_string(),
        dataset: Dataset::Synthetic,
        language,
        speaker_id: format!("{lang}{g}"),
        gender,
        emotion,
        intensity: None,
    })
}

/// Canonical label sets per corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelScheme;

impl LabelScheme {
    pub fn canonical(self, dataset: Dataset) -> &'static [Emotion] {
        use Emotion::*;
        match dataset {
            Dataset::Ravdess | Dataset::Emovo => &[Anger, Fear, Joy, Sadness, Disgust, Surprise, Neutral],
            Dataset::Emodb => &[Anger, Fear, Joy, Boredom, Sadness, Disgust, Neutral],
            Dataset::Synthetic => &Emotion::SHARED,
        }
    }

    /// Canonical label for a raw label of `dataset`.
    pub fn map(self, dataset: Dataset, raw: Emotion) -> Option<Emotion> {
        let mapped = match (dataset, raw) {
            (Dataset::Ravdess, Emotion::Calm) => Emotion::Neutral,
            (_, e) => e,
        };
        self.canonical(dataset).contains(&mapped).then_some(mapped)
    }

    /// Intersection of the canonical sets of the three corpora.
    pub fn shared(self) -> Vec<Emotion> {
        let sets: Vec<&[Emotion]> = Dataset::CORPORA.iter().map(|&d| self.canonical(d)).collect();
        sets[0].iter().copied().filter(|e| sets[1..].iter().all(|s| s.contains(e))).collect()
    }
}

/// Replace raw labels with canonical ones; optionally keep only the shared
/// label set.
pub fn map_labels(manifest: &[Utterance], scheme: LabelScheme, restrict_to_shared: bool) -> Result<Vec<Utterance>, ExperimentError> {
    if manifest.is_empty() {
        return Err(ExperimentError::EmptyManifest);
    }
    let mut out = Vec::with_capacity(manifest.len());
    for u in manifest {
        let emotion = scheme.map(u.dataset, u.emotion).ok_or_else(|| ExperimentError::UnmappedLabel {
            dataset: u.dataset,
            label: u.emotion.label().to_string(),
            path: u.path.clone(),
        })?;
        if restrict_to_shared && !emotion.is_shared() {
            continue;
        }
        out.push(Utterance { emotion, ..u.clone() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ravdess_convention() {
        let u = parse_ravdess("Actor_02/03-01-02-01-01-01-02.wav").unwrap();
        assert_eq!(u.emotion, Emotion::Calm);
        assert_eq!(u.speaker_id, "02");
        assert_eq!(u.gender, Gender::Female);
        assert_eq!(u.language, Language::English);
        let mapped = map_labels(&[u], LabelScheme, false).unwrap();
        assert_eq!(mapped[0].emotion, Emotion::Neutral);

        let m = parse_ravdess("03-01-05-02-02-01-13.wav").unwrap();
        assert_eq!((m.emotion, m.gender, m.intensity.as_deref()), (Emotion::Anger, Gender::Male, Some("strong")));
        assert!(matches!(parse_ravdess("03-02-05-02-02-01-13.wav"), Err(SkipReason::Excluded(_))));
        assert!(matches!(parse_ravdess("03-01-09-01-01-01-01.wav"), Err(SkipReason::Unrecognized(_))));
        assert!(matches!(parse_ravdess("03-01-05-01-01-01.wav"), Err(SkipReason::Unrecognized(_))));
        assert!(matches!(parse_ravdess("03-01-05-01-01-01-01.mp3"), Err(SkipReason::Unrecognized(_))));
    }

    #[test]
    fn emodb_convention() {
        let u = parse_emodb("wav/03a01Fa.wav").unwrap();
        assert_eq!((u.emotion, u.gender, u.speaker_id.as_str()), (Emotion::Joy, Gender::Male, "03"));
        let f = parse_emodb("16b10Lb.wav").unwrap();
        assert_eq!((f.emotion, f.gender), (Emotion::Boredom, Gender::Female));
        for (name, e) in [("08a01Wa", Emotion::Anger), ("08a01Ea", Emotion::Disgust), ("08a01Aa", Emotion::Fear), ("08a01Ta", Emotion::Sadness), ("08a01Na", Emotion::Neutral)] {
            assert_eq!(parse_emodb(&format!("{name}.wav")).unwrap().emotion, e);
        }
        assert!(parse_emodb("04a01Fa.wav").is_err());
        assert!(parse_emodb("03a01Xa.wav").is_err());
        assert!(parse_emodb("03a01F.wav").is_err());
    }

    #[test]
    fn emovo_convention() {
        let u = parse_emovo("f1/dis-f1-b1.wav").unwrap();
        assert_eq!((u.emotion, u.gender, u.speaker_id.as_str()), (Emotion::Disgust, Gender::Female, "f1"));
        assert_eq!(parse_emovo("sor-m3-n5.wav").unwrap().emotion, Emotion::Surprise);
        assert_eq!(parse_emovo("RAB-M2-L4.wav").unwrap().emotion, Emotion::Anger);
        assert!(parse_emovo("xyz-m1-b1.wav").is_err());
        assert!(parse_emovo("neu-m4-b1.wav").is_err());
    }

    #[test]
    fn synthetic_names_round_trip() {
        let name = synthetic_filename(Language::SyntheticB, Gender::Female, Emotion::Sadness, 7);
        let u = parse_synthetic(&name).unwrap();
        assert_eq!((u.language, u.gender, u.emotion), (Language::SyntheticB, Gender::Female, Emotion::Sadness));
    }

    #[test]
    fn shared_set_is_the_intersection() {
        assert_eq!(LabelScheme.shared(), Emotion::SHARED.to_vec());
    }

    fn utt(dataset: Dataset, emotion: Emotion) -> Utterance {
        Utterance {
            path: "x.wav".into(),
            dataset,
            language: dataset.language().unwrap_or(Language::SyntheticA),
            speaker_id: "01".into(),
            gender: Gender::Male,
            emotion,
            intensity: None,
        }
    }

    #[test]
    fn mapping_rules() {
        let m = vec![utt(Dataset::Emodb, Emotion::Boredom), utt(Dataset::Emodb, Emotion::Anger)];
        assert_eq!(map_labels(&m, LabelScheme, false).unwrap().len(), 2);
        let shared = map_labels(&m, LabelScheme, true).unwrap();
        assert_eq!(shared.len(), 1);
        assert_eq!(shared[0].emotion, Emotion::Anger);

        let bad = vec![utt(Dataset::Emodb, Emotion::Surprise)];
        assert!(matches!(map_labels(&bad, LabelScheme, false), Err(ExperimentError::UnmappedLabel { .. })));
        assert!(matches!(map_labels(&[], LabelScheme, false), Err(ExperimentError::EmptyManifest)));
        let calm_in_emovo = vec![utt(Dataset::Emovo, Emotion::Calm)];
        assert!(map_labels(&calm_in_emovo, LabelScheme, false).is_err());
    }

    #[test]
    fn mapping_is_idempotent_and_monotone() {
        let all = [Emotion::Anger, Emotion::Calm, Emotion::Neutral, Emotion::Surprise, Emotion::Joy];
        let m: Vec<Utterance> = all.iter().map(|&e| utt(Dataset::Ravdess, e)).collect();
        for restrict in [false, true] {
            let once = map_labels(&m, LabelScheme, restrict).unwrap();
            let twice = map_labels(&once, LabelScheme, restrict).unwrap();
            assert_eq!(once, twice);
            assert!(once.len() <= m.len());
        }
        let unrestricted = map_labels(&m, LabelScheme, false).unwrap();
        let restricted = map_labels(&m, LabelScheme, true).unwrap();
        assert!(restricted.len() <= unrestricted.len());
    }
}
