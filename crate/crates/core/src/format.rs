//! Line-oriented text format for prepared sums.
//!
//! ```text
//! # comment
//! domain N 10 upper 1e10 balanced 0
//! term coeff 1 0 alpha 0 beta -1/1 gamma 1 unit identity
//! term coeff 0.5 -0.25 alpha 1.5 beta -2/1 gamma 0 unit tail 1:0.5,2:-0.1
//! term coeff 2 0 alpha 0 beta -3/2 gamma 0 unit table u.csv delta 0.01
//! ```
//!
//! Table paths are resolved against a base directory (the sum file's own
//! directory on the command line) and kept verbatim as the unit label.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::termalg::{
    parse_rational, DomainSpec, ExponentTriple, PerturbationUnit, PreparedSum, RationalTail, TabulatedUnit, Term,
    UnitFunction, UnitTable,
};

/// Parsed contents of a sum file, terms in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct SumFile {
    pub domain: DomainSpec,
    pub terms: Vec<Term>,
}

impl SumFile {
    pub fn to_prepared(&self) -> Result<PreparedSum> {
        PreparedSum::new(self.terms.clone(), self.domain)
    }
}

/// Resolves `table <path>` entries.
pub trait TableLoader {
    fn load(&self, path: &str) -> Result<Arc<dyn UnitFunction>>;
}

/// Loads CSV tables relative to a base directory.
#[derive(Debug, Clone, Default)]
pub struct FileLoader {
    pub base: PathBuf,
}

impl FileLoader {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self { base: base.into() }
    }
}

impl TableLoader for FileLoader {
    fn load(&self, path: &str) -> Result<Arc<dyn UnitFunction>> {
        let p = Path::new(path);
        let full = if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        };
        Ok(Arc::new(UnitTable::load(&full, path)?))
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

struct Tokens<'a> {
    it: std::str::SplitWhitespace<'a>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.it.next().ok_or_else(|| perr(self.line, format!("missing {what}")))
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.it.next() {
            Some(t) if t == kw => Ok(()),
            Some(t) => Err(perr(self.line, format!("expected '{kw}', found '{t}'"))),
            None => Err(perr(self.line, format!("expected '{kw}' before end of line"))),
        }
    }

    fn real(&mut self, what: &str) -> Result<f64> {
        let t = self.next(what)?;
        let v: f64 = t
            .parse()
            .map_err(|_| perr(self.line, format!("{what}: '{t}' is not a number")))?;
        if !v.is_finite() {
            return Err(perr(self.line, format!("{what} must be finite, got '{t}'")));
        }
        Ok(v)
    }

    fn end(&mut self) -> Result<()> {
        match self.it.next() {
            Some(t) => Err(perr(self.line, format!("unexpected trailing token '{t}'"))),
            None => Ok(()),
        }
    }
}

fn parse_domain(tk: &mut Tokens) -> Result<DomainSpec> {
    tk.keyword("N")?;
    let lower = tk.real("N")?;
    tk.keyword("upper")?;
    let up = tk.next("upper")?;
    let upper = if up == "inf" {
        f64::INFINITY
    } else {
        up.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| perr(tk.line, format!("upper: '{up}' is not a finite number or 'inf'")))?
    };
    tk.keyword("balanced")?;
    let balanced = match tk.next("balanced flag")? {
        "0" => false,
        "1" => true,
        t => return Err(perr(tk.line, format!("balanced must be 0 or 1, got '{t}'"))),
    };
    tk.end()?;
    DomainSpec::new(lower, upper, balanced).map_err(|e| perr(tk.line, e.to_string()))
}

fn parse_tail(tk: &Tokens, spec: &str) -> Result<RationalTail> {
    let mut terms = Vec::new();
    for part in spec.split(',') {
        let (k, a) = part
            .split_once(':')
            .ok_or_else(|| perr(tk.line, format!("tail entry '{part}' is not k:a")))?;
        let k: u32 = k
            .parse()
            .map_err(|_| perr(tk.line, format!("tail power '{k}' is not a positive integer")))?;
        let a: f64 = a
            .parse()
            .map_err(|_| perr(tk.line, format!("tail coefficient '{a}' is not a number")))?;
        terms.push((k, a));
    }
    RationalTail::new(terms).map_err(|e| perr(tk.line, e.to_string()))
}

fn parse_term(tk: &mut Tokens, loader: &dyn TableLoader) -> Result<Term> {
    tk.keyword("coeff")?;
    let re = tk.real("coefficient real part")?;
    let im = tk.real("coefficient imaginary part")?;
    tk.keyword("alpha")?;
    let alpha = tk.real("alpha")?;
    tk.keyword("beta")?;
    let b = tk.next("beta")?;
    let beta = parse_rational(b).ok_or_else(|| perr(tk.line, format!("beta: '{b}' is not p/q")))?;
    tk.keyword("gamma")?;
    let g = tk.next("gamma")?;
    let gamma: u32 = g
        .parse()
        .map_err(|_| perr(tk.line, format!("gamma: '{g}' is not a nonnegative integer")))?;
    tk.keyword("unit")?;
    let unit = match tk.next("unit kind")? {
        "identity" => PerturbationUnit::Identity,
        "tail" => {
            let spec = tk.next("tail entries")?;
            PerturbationUnit::RationalTail(parse_tail(tk, spec)?)
        }
        "table" => {
            let path = tk.next("table path")?;
            tk.keyword("delta")?;
            let delta = tk.real("delta")?;
            let src = loader.load(path).map_err(|e| match e {
                Error::Io(m) | Error::Data(m) => perr(tk.line, format!("table '{path}': {m}")),
                other => other,
            })?;
            PerturbationUnit::Tabulated(TabulatedUnit::new(src, delta).map_err(|e| perr(tk.line, e.to_string()))?)
        }
        t => return Err(perr(tk.line, format!("unknown unit kind '{t}'"))),
    };
    tk.end()?;
    let exp = ExponentTriple::wrapped(alpha, beta, gamma).map_err(|e| perr(tk.line, e.to_string()))?;
    Ok(Term::new(Complex64::new(re, im), exp, unit))
}

/// Parses a sum file; `loader` resolves table units.
pub fn parse_sum_file(text: &str, loader: &dyn TableLoader) -> Result<SumFile> {
    let mut domain = None;
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut tk = Tokens {
            it: line.split_whitespace(),
            line: i + 1,
        };
        let Some(head) = tk.it.next() else {
            continue;
        };
        match head {
            "domain" => {
                if domain.is_some() {
                    return Err(perr(i + 1, "second 'domain' line"));
                }
                domain = Some(parse_domain(&mut tk)?);
            }
            "term" => terms.push(parse_term(&mut tk, loader)?),
            t => return Err(perr(i + 1, format!("unknown directive '{t}'"))),
        }
    }
    let domain = domain.ok_or_else(|| perr(0, "no 'domain' line"))?;
    if terms.is_empty() {
        return Err(perr(0, "no 'term' lines"));
    }
    Ok(SumFile { domain, terms })
}

/// Reads and parses a file, resolving tables next to it.
pub fn read_sum_file(path: &Path) -> Result<SumFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_sum_file(&text, &FileLoader::new(base))
}

/// Canonical text; `parse(serialize(s)) == s`.
pub fn serialize_sum_file(s: &SumFile) -> String {
    let mut out = String::new();
    let d = &s.domain;
    let upper = if d.upper().is_finite() {
        d.upper().to_string()
    } else {
        "inf".into()
    };
    let _ = writeln!(
        out,
        "domain N {} upper {} balanced {}",
        d.lower(),
        upper,
        u8::from(d.balanced())
    );
    for t in &s.terms {
        let b = t.exp.beta();
        let _ = write!(
            out,
            "term coeff {} {} alpha {} beta {}/{} gamma {} unit ",
            t.coeff.re,
            t.coeff.im,
            t.exp.alpha(),
            b.numer(),
            b.denom(),
            t.exp.gamma()
        );
        match &t.unit {
            PerturbationUnit::Identity => out.push_str("identity"),
            PerturbationUnit::RationalTail(r) => {
                let parts: Vec<String> = r.terms().iter().map(|(k, a)| format!("{k}:{a}")).collect();
                let _ = write!(out, "tail {}", parts.join(","));
            }
            PerturbationUnit::Tabulated(u) => {
                let _ = write!(out, "table {} delta {}", u.label(), u.delta());
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct Flat(String);

    impl UnitFunction for Flat {
        fn eval(&self, _y: f64) -> f64 {
            1.0
        }
        fn label(&self) -> &str {
            &self.0
        }
        fn sup_abs_beyond(&self, _from: f64) -> f64 {
            1.0
        }
    }

    struct FlatLoader;

    impl TableLoader for FlatLoader {
        fn load(&self, path: &str) -> Result<Arc<dyn UnitFunction>> {
            Ok(Arc::new(Flat(path.to_string())))
        }
    }

    const CANON: &str = "domain N 10 upper 10000000000 balanced 0
term coeff 1 0 alpha 0 beta -1/1 gamma 1 unit identity
term coeff 0.5 -0.25 alpha 1.5 beta -2/3 gamma 0 unit tail 1:0.5,2:-0.1
term coeff 2 0 alpha 0 beta 1/1 gamma 0 unit table u.csv delta 0.01
";

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let s = parse_sum_file(CANON, &FlatLoader).unwrap();
        assert_eq!(serialize_sum_file(&s), CANON);
        assert_eq!(parse_sum_file(&serialize_sum_file(&s), &FlatLoader).unwrap(), s);
    }

    #[test]
    fn comments_and_infinite_upper() {
        let s = parse_sum_file(
            "# header\n\ndomain N 2 upper inf balanced 0 # tail\nterm coeff 3 0 alpha 0 beta -1 gamma 0 unit identity\n",
            &FlatLoader,
        )
        .unwrap();
        assert!(!s.domain.is_bounded());
        assert_eq!(s.terms.len(), 1);
        assert!(serialize_sum_file(&s).starts_with("domain N 2 upper inf balanced 0\n"));
    }

    #[test]
    fn malformed_lines() {
        let bad = [
            "domain N 10 upper 1e10 balanced 0\nterm coeff 1 alpha 0 beta -1/1 gamma 0 unit identity\n",
            "domain N 10 upper 1e10 balanced 2\nterm coeff 1 0 alpha 0 beta -1/1 gamma 0 unit identity\n",
            "domain N 10 upper 1e10 balanced 0\nterm coeff 1 0 alpha 0 beta -1/0 gamma 0 unit identity\n",
            "domain N 10 upper 1e10 balanced 0\nterm coeff 1 0 alpha 0 beta -1/1 gamma 0 unit bogus\n",
            "domain N 10 upper 1e10 balanced 0\n",
            "term coeff 1 0 alpha 0 beta -1/1 gamma 0 unit identity\n",
            "domain N 10 upper 50 balanced 0\nterm coeff 1 0 alpha 0 beta -1/1 gamma 0 unit identity\n",
            "domain N 10 upper 1e10 balanced 0\nterm coeff 1 0 alpha 0 beta -1/1 gamma 0 unit identity extra\n",
        ];
        for b in bad {
            assert!(
                matches!(parse_sum_file(b, &FlatLoader), Err(Error::Parse { .. })),
                "{b}"
            );
        }
    }

    #[test]
    fn error_reports_line() {
        let e = parse_sum_file("domain N 10 upper inf balanced 0\n\nterm coeff x 0\n", &FlatLoader).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }
}
