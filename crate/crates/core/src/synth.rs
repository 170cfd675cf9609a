//! Deterministic synthetic news corpus with planted journal names.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Article, ArticleSet, ColumnLayout};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthConfig {
    pub seed: u64,
    pub articles: usize,
    pub names: usize,
    pub mentions_per_name: usize,
    pub seed_names: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 20_240_601,
            articles: 500,
            names: 60,
            mentions_per_name: 6,
            seed_names: 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthCorpus {
    pub set: ArticleSet,
    /// Every planted name, in generation order.
    pub names: Vec<String>,
    /// The first `seed_names` planted names.
    pub seeds: Vec<String>,
}

impl SynthCorpus {
    pub fn to_tsv(&self) -> String {
        self.set.to_tsv()
    }
}

const KANA: &[char] = &[
    'ア', 'イ', 'ウ', 'エ', 'オ', 'カ', 'キ', 'ク', 'ケ', 'コ', 'サ', 'シ', 'ス', 'セ', 'ソ', 'タ',
    'チ', 'ツ', 'テ', 'ト', 'ナ', 'ニ', 'ヌ', 'ネ', 'ノ', 'ハ', 'ヒ', 'フ', 'ヘ', 'ホ', 'マ', 'ミ',
    'ム', 'メ', 'モ', 'ラ', 'リ', 'ル', 'レ', 'ロ', 'バ', 'ビ', 'ブ', 'ベ', 'ボ', 'パ', 'ピ', 'プ',
];
const KANA_TAIL: &[&str] = &[
    "ジャーナル",
    "レターズ",
    "レビュー",
    "サイエンス",
    "リポーツ",
    "メディシン",
];
const EN_ADJ: &[&str] = &[
    "Applied",
    "Annual",
    "Clinical",
    "Cellular",
    "Global",
    "Marine",
    "Molecular",
    "Neural",
    "Planetary",
    "Quantum",
    "Royal",
    "Solar",
    "Tropical",
    "Urban",
];
const EN_NOUN: &[&str] = &[
    "Biology",
    "Chemistry",
    "Ecology",
    "Genetics",
    "Geology",
    "Immunology",
    "Materials",
    "Optics",
    "Physics",
    "Robotics",
    "Virology",
    "Zoology",
];
const EN_FORM: &[&str] = &[
    "Journal of {a} {n}",
    "{a} {n} Letters",
    "{a} {n} Reports",
    "Reviews in {a} {n}",
];

const TOPICS: &[&str] = &[
    "新しい治療法",
    "深海の微生物",
    "氷河の後退",
    "睡眠と記憶",
    "渡り鳥の経路",
    "電池の寿命",
    "火山の噴火",
    "腸内細菌",
    "遺伝子の働き",
    "宇宙の膨張",
    "森林の再生",
    "言語の起源",
];
const ORGS: &[&str] = &[
    "東西大学",
    "北海研究所",
    "中央医科大",
    "南山理科大",
    "国立海洋機構",
    "山河大学",
    "湾岸工科大",
    "青葉研究センター",
];
const PEOPLE: &[&str] = &[
    "田中教授",
    "佐藤准教授",
    "鈴木研究員",
    "高橋所長",
    "伊藤助教",
    "渡辺主任",
];
const QUOTES: &[&str] = &[
    "大きな一歩だ",
    "予想外の結果だった",
    "まだ分からないことが多い",
    "応用が期待できる",
    "慎重に検証したい",
    "驚くべき発見だ",
];
const WORKS: &[&str] = &[
    "星の記憶",
    "海辺の午後",
    "遠い約束",
    "白い季節",
    "夜明けの街",
    "風の通り道",
];

fn kana_word(rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let n = rng.random_range(min..=max);
    (0..n)
        .map(|_| *KANA.choose(rng).expect("non-empty"))
        .collect()
}

fn english_name(rng: &mut ChaCha8Rng) -> String {
    let form = EN_FORM.choose(rng).expect("non-empty");
    form.replace("{a}", EN_ADJ.choose(rng).expect("non-empty"))
        .replace("{n}", EN_NOUN.choose(rng).expect("non-empty"))
}

fn kana_name(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{}・{}",
        kana_word(rng, 2, 4),
        KANA_TAIL.choose(rng).expect("non-empty")
    )
}

/// `count` distinct names, none a substring of another, cycling through
/// katakana, English, and katakana with an English gloss.
pub fn planted_names(rng: &mut ChaCha8Rng, count: usize) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(count);
    while names.len() < count {
        let cand = match names.len() % 3 {
            0 => kana_name(rng),
            1 => english_name(rng),
            _ => format!("{}（{}）", kana_name(rng), english_name(rng)),
        };
        if names
            .iter()
            .all(|n| !n.contains(&cand) && !cand.contains(n.as_str()))
        {
            names.push(cand);
        }
    }
    names
}

fn mention(rng: &mut ChaCha8Rng, name: &str) -> String {
    let org = ORGS.choose(rng).expect("non-empty");
    let topic = TOPICS.choose(rng).expect("non-empty");
    match rng.random_range(0..4) {
        0 => format!("{org}のチームが{topic}に関する成果を科学誌「{name}」に発表した。"),
        1 => format!("研究成果は英科学誌「{name}」電子版に掲載された。"),
        2 => format!("{topic}についての論文を英科学誌{name}に発表した。"),
        _ => format!("{org}の研究は学術誌「{name}」に掲載された。"),
    }
}

fn filler(rng: &mut ChaCha8Rng) -> String {
    let org = ORGS.choose(rng).expect("non-empty");
    let topic = TOPICS.choose(rng).expect("non-empty");
    let who = PEOPLE.choose(rng).expect("non-empty");
    match rng.random_range(0..7) {
        0 => format!(
            "{org}は{topic}について{}年から調べてきた。",
            rng.random_range(1990..2020)
        ),
        1 => format!(
            "{who}は「{}」と話している。",
            QUOTES.choose(rng).expect("non-empty")
        ),
        2 => format!(
            "映画「{}」の公開に合わせて講演会が開かれた。",
            WORKS.choose(rng).expect("non-empty")
        ),
        3 => format!(
            "{org}は会報誌「{}通信」を毎月発行している。",
            kana_word(rng, 2, 4)
        ),
        4 => format!("{topic}の仕組みはこれまでよく分かっていなかった。"),
        5 => format!(
            "調査には{}人が参加し、{}%に効果が見られた。",
            rng.random_range(20..900),
            rng.random_range(5..95)
        ),
        _ => format!("{who}らは今後、{topic}の研究をさらに進める方針だ。"),
    }
}

/// Generates the corpus. The same config always yields the same bytes.
pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let names = planted_names(&mut rng, cfg.names);

    let mut slots: Vec<Vec<String>> = vec![Vec::new(); cfg.articles.max(1)];
    for name in &names {
        for _ in 0..cfg.mentions_per_name {
            let idx = rng.random_range(0..slots.len());
            let m = mention(&mut rng, name);
            slots[idx].push(m);
        }
    }

    let layout = ColumnLayout::default();
    let mut articles = Vec::with_capacity(slots.len());
    for (i, mut sentences) in slots.into_iter().enumerate() {
        for _ in 0..rng.random_range(2..6) {
            sentences.push(filler(&mut rng));
        }
        sentences.shuffle(&mut rng);
        let id = format!("syn{:04}", i + 1);
        let body: String = sentences.concat();
        let article = Article::new(id.clone(), body)
            .with_meta(layout.name(0), format!("https://news.example/{id}"))
            .with_meta(layout.name(1), format!("記事{}", i + 1))
            .with_meta(
                layout.name(3),
                format!("2016-{:02}-{:02}", i % 12 + 1, i % 28 + 1),
            )
            .with_meta(layout.name(4), id.clone())
            .with_meta(layout.name(5), "science");
        articles.push(article);
    }
    let set = ArticleSet::from_articles(articles).expect("synthetic ids are unique");
    let seeds = names.iter().take(cfg.seed_names).cloned().collect();
    SynthCorpus { set, names, seeds }
}
