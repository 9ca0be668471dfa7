//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::{format_rational, int, parse_rational, rat, Rational};
use crate::matrix::Mat2;

/// How the conjugator `h` is given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HSpec {
    /// Pipeline default: `diag(2, 1)` for `sl2z`, the searched quaternion
    /// congruent to `[[1,-1/2],[0,1]]` for `quaternionic`.
    Default,
    /// `matrix:a,b,c,d`. For `quaternionic` this is the 2-adic target a
    /// quaternion is searched for.
    Matrix(Mat2<Rational>),
    /// `quaternion:x0,x1,x2,x3`, coordinates on `1, i, j, ij`.
    Quaternion([Rational; 4]),
}

impl HSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "default" {
            return Ok(HSpec::Default);
        }
        let (kind, body) = s.split_once(':').ok_or_else(|| Error::Config(format!("bad h {s:?}")))?;
        let xs: Vec<Rational> = body.split(',').map(|x| parse_rational(x.trim())).collect::<Result<_>>()?;
        let xs: [Rational; 4] = xs.try_into().map_err(|_| Error::Config(format!("h needs 4 entries: {s:?}")))?;
        match kind.trim() {
            "matrix" => {
                let [a, b, c, d] = xs;
                Ok(HSpec::Matrix(Mat2::new(a, b, c, d)))
            }
            "quaternion" => Ok(HSpec::Quaternion(xs)),
            k => Err(Error::Config(format!("unknown h kind {k:?}"))),
        }
    }

    /// The default 2-adic target for the quaternionic pipeline.
    pub fn paper_target() -> Mat2<Rational> {
        Mat2::new(int(1), rat(-1, 2), int(0), int(1))
    }
}

impl fmt::Display for HSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: [&Rational; 4]| xs.map(format_rational).join(",");
        match self {
            HSpec::Default => f.write_str("default"),
            HSpec::Matrix(m) => write!(f, "matrix:{}", join(m.entries())),
            HSpec::Quaternion(c) => write!(f, "quaternion:{}", join([&c[0], &c[1], &c[2], &c[3]])),
        }
    }
}

/// Every knob of every pipeline. Keys not given take their defaults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// Dihedral parameter in `x -> a/x`.
    pub a: Rational,
    /// Invariant degree bound `D`.
    pub degree: usize,
    pub d: i64,
    pub b_bound: u64,
    /// Starting unit height `B`.
    pub height: u64,
    /// Largest height tried before a level is reported as not surjective.
    pub height_max: u64,
    pub k_min: u32,
    pub k_max: u32,
    /// Last precision tried while waiting for intersection indices to stabilize.
    pub index_k_max: u32,
    pub h: HSpec,
    pub word_length: usize,
    pub word_limit: usize,
    /// Seed for the sampled membership rechecks.
    pub seed: u64,
    pub samples: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            a: int(2),
            degree: 8,
            d: 17,
            b_bound: 100,
            height: 20,
            height_max: 50,
            k_min: 1,
            k_max: 3,
            index_k_max: 4,
            h: HSpec::Default,
            word_length: 12,
            word_limit: 50_000,
            seed: 1,
            samples: 64,
            out: None,
        }
    }
}

pub const KEYS: [&str; 15] = [
    "a",
    "b_bound",
    "d",
    "degree",
    "h",
    "height",
    "height_max",
    "index_k_max",
    "k_max",
    "k_min",
    "out",
    "samples",
    "seed",
    "word_length",
    "word_limit",
];

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    /// Parses a config file. Blank lines and `#` comments are ignored;
    /// repeated keys are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key {k}", n + 1)));
            }
            cfg.set(k, v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key; used for file lines and command-line overrides alike.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "a" => self.a = parse_rational(value).map_err(|e| Error::Config(format!("a: {e}")))?,
            "degree" => self.degree = number(key, value)?,
            "d" => self.d = number(key, value)?,
            "b_bound" => self.b_bound = number(key, value)?,
            "height" => self.height = number(key, value)?,
            "height_max" => self.height_max = number(key, value)?,
            "k_min" => self.k_min = number(key, value)?,
            "k_max" => self.k_max = number(key, value)?,
            "index_k_max" => self.index_k_max = number(key, value)?,
            "h" => self.h = HSpec::parse(value).map_err(|e| Error::Config(format!("h: {e}")))?,
            "word_length" => self.word_length = number(key, value)?,
            "word_limit" => self.word_limit = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "samples" => self.samples = number(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("degree", self.degree as u64),
            ("b_bound", self.b_bound),
            ("height", self.height),
            ("height_max", self.height_max),
            ("k_min", self.k_min as u64),
            ("k_max", self.k_max as u64),
            ("index_k_max", self.index_k_max as u64),
            ("word_length", self.word_length as u64),
            ("word_limit", self.word_limit as u64),
        ];
        if let Some((k, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{k} must be positive")));
        }
        if self.k_min > self.k_max || self.k_min > self.index_k_max {
            return Err(Error::Config("k_min must not exceed k_max or index_k_max".into()));
        }
        if self.k_max > 7 || self.index_k_max > 5 {
            return Err(Error::Config("k_max <= 7 and index_k_max <= 5 keep SL2(Z/2^K) enumerable".into()));
        }
        if self.height > self.height_max {
            return Err(Error::Config("height must not exceed height_max".into()));
        }
        Ok(())
    }

    /// Effective values of every key except `out`, in key order.
    pub fn pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("a", format_rational(&self.a));
        put("b_bound", self.b_bound.to_string());
        put("d", self.d.to_string());
        put("degree", self.degree.to_string());
        put("h", self.h.to_string());
        put("height", self.height.to_string());
        put("height_max", self.height_max.to_string());
        put("index_k_max", self.index_k_max.to_string());
        put("k_max", self.k_max.to_string());
        put("k_min", self.k_min.to_string());
        put("samples", self.samples.to_string());
        put("seed", self.seed.to_string());
        put("word_length", self.word_length.to_string());
        put("word_limit", self.word_limit.to_string());
        m
    }

    /// SHA-256 over the `key=value` lines of [`RunConfig::pairs`].
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.pairs() {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_hash() {
        let c = RunConfig::parse("# comment\nd = 17\nh = matrix:1,-1/2,0,1\nout = x.json\n").unwrap();
        assert_eq!(c.h, HSpec::Matrix(HSpec::paper_target()));
        let e = RunConfig { h: HSpec::Matrix(HSpec::paper_target()), ..Default::default() };
        assert_eq!(c.hash(), e.hash());
        assert_eq!(c.hash().len(), 64);
        assert!(RunConfig::parse("d = 1\nd = 2").is_err());
        assert!(RunConfig::parse("nonsense = 1").is_err());
        assert!(RunConfig::parse("height = 0").is_err());
        assert!(RunConfig::parse("height = 60").is_err());
        let keys: Vec<String> = RunConfig::default().pairs().into_keys().collect();
        let expected: Vec<&str> = KEYS.iter().copied().filter(|k| *k != "out").collect();
        assert_eq!(keys, expected);
    }

    #[test]
    fn h_round_trip() {
        for (s, canon) in [
            ("default", "default"),
            ("matrix:2,0,0,1", "matrix:2/1,0/1,0/1,1/1"),
            ("quaternion:9,-8,39/4,15/4", "quaternion:9/1,-8/1,39/4,15/4"),
        ] {
            assert_eq!(HSpec::parse(s).unwrap().to_string(), canon);
            assert_eq!(HSpec::parse(canon).unwrap().to_string(), canon);
        }
        assert!(HSpec::parse("matrix:1,2").is_err());
    }
}
