//! `key=value` front end to the theta, factorial and series evaluators.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::series::{e_sum, v_sum, ESeriesSpec, Upper, VSeriesSpec};
use crate::theta::{qp_factorial, theta, Nome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subject {
    Theta,
    Qpfact,
    Eseries,
    Vseries,
}

impl Subject {
    pub const ALL: [Subject; 4] = [
        Subject::Theta,
        Subject::Qpfact,
        Subject::Eseries,
        Subject::Vseries,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subject::Theta => "theta",
            Subject::Qpfact => "qpfact",
            Subject::Eseries => "eseries",
            Subject::Vseries => "vseries",
        }
    }

    /// Required and optional keys.
    pub fn keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Subject::Theta => (&["x", "p"], &[]),
            Subject::Qpfact => (&["a", "q", "p", "n"], &[]),
            Subject::Eseries => (&["num", "den", "q", "p"], &["z", "n"]),
            Subject::Vseries => (&["a1", "tail", "q", "p"], &["z", "n"]),
        }
    }

    pub fn usage(self) -> String {
        let (req, opt) = self.keys();
        let mut s = self.name().to_string();
        for k in req {
            s += &format!(" {k}=..");
        }
        for k in opt {
            s += &format!(" [{k}=..]");
        }
        s
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subject {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown eval subject `{s}`")))
    }
}

struct Args<'a> {
    map: BTreeMap<&'a str, &'a str>,
    prec: usize,
}

impl<'a> Args<'a> {
    fn parse(subject: Subject, args: &'a [String], prec: usize) -> Result<Self> {
        let (req, opt) = subject.keys();
        let mut map = BTreeMap::new();
        for a in args {
            let (k, v) = a
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got `{a}`")))?;
            if !req.contains(&k) && !opt.contains(&k) {
                return Err(Error::InvalidConfig(format!(
                    "unknown key `{k}`; usage: {}",
                    subject.usage()
                )));
            }
            if map.insert(k, v).is_some() {
                return Err(Error::InvalidConfig(format!("key `{k}` given twice")));
            }
        }
        if let Some(k) = req.iter().find(|k| !map.contains_key(*k)) {
            return Err(Error::InvalidConfig(format!(
                "missing `{k}`; usage: {}",
                subject.usage()
            )));
        }
        Ok(Args { map, prec })
    }

    fn complex(&self, k: &str) -> Result<Complex> {
        Complex::parse(self.map[k], self.prec)
    }

    fn list(&self, k: &str) -> Result<Vec<Complex>> {
        let v = self.map[k];
        if v.trim().is_empty() {
            return Ok(Vec::new());
        }
        v.split(',').map(|x| Complex::parse(x, self.prec)).collect()
    }

    fn int(&self, k: &str) -> Result<Option<i64>> {
        self.map
            .get(k)
            .map(|v| {
                v.trim().parse().map_err(|_| {
                    Error::InvalidConfig(format!("`{k}` must be an integer, got `{v}`"))
                })
            })
            .transpose()
    }

    fn z(&self) -> Result<Complex> {
        match self.map.get("z") {
            Some(_) => self.complex("z"),
            None => Ok(Complex::one(self.prec)),
        }
    }

    fn upper(&self) -> Result<Upper> {
        match self.int("n")? {
            Some(n) if n >= 0 => Ok(Upper::Cutoff(n as u32)),
            Some(n) => Err(Error::InvalidConfig(format!(
                "cutoff n must be nonnegative, got {n}"
            ))),
            None => Ok(Upper::Terminating),
        }
    }
}

/// Evaluates `subject` at the `key=value` arguments. Series without `n`
/// must terminate.
pub fn evaluate(subject: Subject, args: &[String], ctx: &PrecisionContext) -> Result<Complex> {
    let a = Args::parse(subject, args, ctx.precision_bits())?;
    let nome = Nome::new(a.complex("p")?, ctx)?;
    match subject {
        Subject::Theta => theta(&a.complex("x")?, &nome, ctx),
        Subject::Qpfact => {
            let n = a.int("n")?.unwrap_or(0);
            qp_factorial(&a.complex("a")?, &a.complex("q")?, &nome, n, ctx)
        }
        Subject::Eseries => {
            let spec = ESeriesSpec::new(
                a.list("num")?,
                a.list("den")?,
                a.complex("q")?,
                nome,
                a.z()?,
            )?;
            Ok(e_sum(&spec, a.upper()?, ctx)?.value)
        }
        Subject::Vseries => {
            let spec = VSeriesSpec::new(a.complex("a1")?, a.list("tail")?, a.complex("q")?, nome)
                .with_z(a.z()?);
            Ok(v_sum(&spec, a.upper()?, ctx)?.value)
        }
    }
}
