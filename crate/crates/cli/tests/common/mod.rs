#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use namefit_core::distributions::RandomSource;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const HEADER: &str =
    "person_id,name,gender,region,date_start,date_end,fictitious,nickname,exclude_category,origin,source_tag\n";

const ORIGINS: [(&str, f64); 8] = [
    ("Biblical", 0.40),
    ("Semitic-Hebrew", 0.20),
    ("Greek", 0.18),
    ("Latin", 0.08),
    ("Semitic-Greek", 0.07),
    ("Persian", 0.03),
    ("Arabian", 0.03),
    ("Egyptian", 0.01),
];

pub struct Fixture {
    rng: ChaCha8Rng,
    origins: Vec<&'static str>,
    body: String,
    next_id: u64,
}

fn pick(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

pub fn name(i: usize) -> String {
    format!("N{i:03}")
}

impl Fixture {
    pub fn new(seed: u64) -> Self {
        let mut rng = RandomSource::new(seed).rng();
        let ow: Vec<f64> = ORIGINS.iter().map(|o| o.1).collect();
        let origins = (0..700).map(|_| ORIGINS[pick(&mut rng, &ow)].0).collect();
        Self { rng, origins, body: String::new(), next_id: 0 }
    }

    pub fn row(&mut self, name_index: usize, tag: &str, region: &str, dates: (i32, i32), fictitious: bool, exclude: &str) {
        self.next_id += 1;
        let origin = self.origins[name_index];
        writeln!(
            self.body,
            "p{},{},male,{region},{},{},{fictitious},false,{exclude},{origin},{tag}",
            self.next_id,
            name(name_index),
            dates.0,
            dates.1
        )
        .unwrap();
    }

    /// `count` draws from `weights` (indexed from `offset`), all with one tag.
    pub fn draws(&mut self, weights: &[f64], offset: usize, count: usize, tag: &str, region: &str) -> Vec<usize> {
        let picks: Vec<usize> = (0..count).map(|_| offset + pick(&mut self.rng, weights)).collect();
        for &i in &picks {
            self.row(i, tag, region, (10, 50), false, "");
        }
        picks
    }

    pub fn csv(&self) -> String {
        format!("{HEADER}{}", self.body)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

pub fn zipf(n: usize, s: f64) -> Vec<f64> {
    (0..n).map(|i| 1.0 / ((i + 1) as f64).powf(s)).collect()
}

/// A corpus with every source tag the shipped presets use. The Ilan-1 pool
/// has 457 names; GA and Josephus are drawn from it, Novels from Ilan-3.
pub fn synthetic_corpus(seed: u64) -> String {
    let mut f = Fixture::new(seed);
    let ilan1 = zipf(457, 1.05);
    let ilan3 = zipf(575, 0.6);

    for i in 0..457 {
        f.row(i, "Ilan-1", "palestine", (-4, 60), false, "");
    }
    f.draws(&ilan1, 0, 1400, "Ilan-1", "palestine");
    for _ in 0..40 {
        let i = pick(f.rng(), &ilan1);
        f.row(i, "Ilan-1", "palestine", (-4, 73), true, "");
    }
    for _ in 0..30 {
        let i = pick(f.rng(), &ilan1);
        f.row(i, "Ilan-1", "palestine", (120, 180), false, "");
    }
    for i in 0..575 {
        f.row(120 + i, "Ilan-3", "western_diaspora", (-4, 73), false, "");
    }
    f.draws(&ilan3, 120, 650, "Ilan-3", "western_diaspora");

    // test samples also appear in the reference, as in the real corpora
    for (tag, n) in [("GA", 82), ("Josephus", 274)] {
        let picks = f.draws(&ilan1, 0, n, tag, "palestine");
        for i in picks {
            f.row(i, "Ilan-1", "palestine", (-4, 73), false, "");
        }
    }
    for _ in 0..7 {
        let i = pick(f.rng(), &ilan1);
        f.row(i, "GA", "palestine", (10, 50), false, "hellenist");
    }
    f.row(0, "GA", "palestine", (10, 50), false, "peter-variant");
    f.row(1, "GA", "palestine", (10, 50), false, "cephas-variant");
    f.draws(&ilan3, 120, 100, "Novels", "palestine");
    let mut uniform: Vec<usize> = (0..457).collect();
    for j in 0..52 {
        let k = f.rng().random_range(j..457);
        uniform.swap(j, k);
        f.row(uniform[j], "Uniform", "palestine", (10, 50), false, "");
    }
    for (tag, n) in [("Bauckham-79", 79), ("GA-Matthew", 31), ("GA-Mark", 34), ("GA-LukeActs", 56), ("GA-John", 19)] {
        f.draws(&ilan1, 0, n, tag, "palestine");
    }
    for j in 0..53 {
        let i = f.rng().random_range(0..457);
        f.row(i, "GB-53", "palestine", (10, 50), false, if j % 2 == 0 { "" } else { "x" });
    }
    f.csv()
}

pub fn write(dir: &Path, file: &str, text: &str) -> PathBuf {
    let p = dir.join(file);
    std::fs::write(&p, text).unwrap();
    p
}

/// Runs the command line in-process; returns (exit code, stdout, stderr).
pub fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["namefit"];
    argv.extend_from_slice(args);
    let code = namefit::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
