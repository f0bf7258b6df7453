//! Artifact assembly: config headers, CSV tables and error naming.

use std::fmt::{Debug, Display, Write as _};

use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// The rendered output of one run and whether its checks passed.
pub struct Artifact {
    pub text: String,
    pub failed: bool,
}

/// A CSV table preceded by `#` lines echoing the subcommand and its config.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<C: Serialize>(subcommand: &str, config: &C, header: &[String]) -> Self {
        let mut text = format!("# polydyn {subcommand}\n# config: {}\n", serde_json::to_string(config).expect("config"));
        text.push_str(&header.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// A trailing `#` line with a derived summary value.
    pub fn note(&mut self, line: impl Display) {
        writeln!(self.text, "# {line}").expect("string write");
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// `{"subcommand": .., "config": .., ...fields}` as pretty JSON.
pub fn json<C: Serialize, B: Serialize>(subcommand: &str, config: &C, body: &B) -> String {
    let mut out = serde_json::Map::new();
    out.insert("subcommand".into(), subcommand.into());
    out.insert("config".into(), serde_json::to_value(config).expect("config"));
    match serde_json::to_value(body).expect("body") {
        serde_json::Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("result".into(), other);
        }
    }
    serde_json::to_string_pretty(&serde_json::Value::Object(out)).expect("json") + "\n"
}

/// Column name with its value domain, e.g. `c_n[exact]`.
pub fn col(name: &str, domain: &str) -> String {
    format!("{name}[{domain}]")
}

/// Shortest round-trip rendering, stable across runs.
pub fn float(x: f64) -> String {
    format!("{x:e}")
}

/// The variant path of an error, read off its `Debug` form: `Json` for
/// `Json(..)`, `Automorphism::InverseMismatch` for nested wrappers.
pub fn error_name<E: Debug>(e: &E) -> String {
    let dbg = format!("{e:?}");
    let mut parts = Vec::new();
    let mut rest = dbg.as_str();
    loop {
        let end = rest.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(rest.len());
        if end == 0 {
            break;
        }
        parts.push(&rest[..end]);
        match rest[end..].strip_prefix('(') {
            Some(inner) => rest = inner,
            None => break,
        }
    }
    parts.join("::")
}

/// Wraps a module error so its name leads the message.
pub fn named<E: Debug + Display>(module: &str, e: E) -> anyhow::Error {
    anyhow::anyhow!("{module}::{}: {e}", error_name(&e))
}

/// Evenly spaced real grid `lo:hi:n` on every coordinate, with a common
/// imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("grid '{s}' is not of the form lo:hi:n"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("grid bound '{t}': {e}"));
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n.trim().parse().map_err(|e| format!("grid count '{n}': {e}"))?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("grid '{s}' needs finite bounds and n ≥ 1"));
        }
        Ok(GridSpec { lo, hi, n })
    }
}

impl GridSpec {
    fn axis(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.lo + step * i as f64).collect()
    }

    /// All `n^k` points, last coordinate varying fastest.
    pub fn points(&self, k: usize, imag: f64) -> Vec<Vec<Complex64>> {
        let axis = self.axis();
        let mut out: Vec<Vec<Complex64>> = vec![Vec::new()];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(Complex64::new(v, imag));
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    #[allow(dead_code)]
    enum Inner {
        Mismatch { n: u32 },
    }

    #[derive(Debug)]
    #[allow(dead_code)]
    enum Outer {
        Wrapped(Inner),
        Plain,
    }

    #[test]
    fn error_names() {
        assert_eq!(error_name(&Outer::Wrapped(Inner::Mismatch { n: 1 })), "Wrapped::Mismatch");
        assert_eq!(error_name(&Outer::Plain), "Plain");
    }

    #[test]
    fn grids() {
        let g: GridSpec = "-1:1:3".parse().unwrap();
        let pts = g.points(2, 0.5);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[1], vec![Complex64::new(-1.0, 0.5), Complex64::new(0.0, 0.5)]);
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("1:2:0".parse::<GridSpec>().is_err());
    }
}
