use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Named growth schedules `k -> omega_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum OmegaKind {
    /// `omega_k = sqrt(k)`
    Sqrt,
    /// `omega_k = (ln(k + 2))^alpha`
    LogPow(f64),
    /// `omega_k = c + ln(k)`
    ConstPlusLog(f64),
    /// `omega_k = c`; not a valid growth schedule, but handy for fixed-order
    /// relation checks.
    Const(f64),
    /// `eta_k = omega_k^{1/2} / 2` of the wrapped schedule.
    HalfSqrt(Box<OmegaKind>),
}

impl OmegaKind {
    fn eval(&self, k: usize) -> f64 {
        let kf = k as f64;
        match self {
            OmegaKind::Sqrt => kf.sqrt(),
            OmegaKind::LogPow(alpha) => (kf + 2.0).ln().powf(*alpha),
            OmegaKind::ConstPlusLog(c) => c + kf.max(1.0).ln(),
            OmegaKind::Const(c) => *c,
            OmegaKind::HalfSqrt(inner) => 0.5 * inner.eval(k).sqrt(),
        }
    }
}

impl fmt::Display for OmegaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaKind::Sqrt => write!(f, "sqrt"),
            OmegaKind::LogPow(a) => write!(f, "logpow:{a}"),
            OmegaKind::ConstPlusLog(c) => write!(f, "constlog:{c}"),
            OmegaKind::Const(c) => write!(f, "const:{c}"),
            OmegaKind::HalfSqrt(inner) => write!(f, "eta:{inner}"),
        }
    }
}

/// A nondecreasing schedule `omega_1, omega_2, ...` of positive reals.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaSchedule {
    pub kind: OmegaKind,
    /// Prefix length on which monotonicity is checked by [`validate`](Self::validate).
    pub monotone_check_horizon: usize,
}

const DEFAULT_HORIZON: usize = 1000;

impl OmegaSchedule {
    pub fn new(kind: OmegaKind) -> Self {
        OmegaSchedule {
            kind,
            monotone_check_horizon: DEFAULT_HORIZON,
        }
    }

    pub fn sqrt() -> Self {
        Self::new(OmegaKind::Sqrt)
    }

    pub fn log_pow(alpha: f64) -> Self {
        Self::new(OmegaKind::LogPow(alpha))
    }

    pub fn const_plus_log(c: f64) -> Self {
        Self::new(OmegaKind::ConstPlusLog(c))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(OmegaKind::Const(c))
    }

    /// The derived schedule `eta_k = omega_k^{1/2} / 2`.
    pub fn eta(&self) -> Self {
        OmegaSchedule {
            kind: OmegaKind::HalfSqrt(Box::new(self.kind.clone())),
            monotone_check_horizon: self.monotone_check_horizon,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.monotone_check_horizon = horizon;
        self
    }

    /// `omega_k` for `k >= 1`.
    pub fn eval(&self, k: usize) -> f64 {
        self.kind.eval(k)
    }

    /// Checks positivity and monotonicity on `1..=horizon` and that the
    /// schedule actually grows there (`omega_horizon > omega_1`).
    pub fn validate(&self) -> Result<()> {
        let horizon = self.monotone_check_horizon.max(2);
        let mut prev = self.eval(1);
        if !(prev > 0.0 && prev.is_finite()) {
            return Err(Error::invalid(format!("omega_1 = {prev} is not positive")));
        }
        for k in 2..=horizon {
            let cur = self.eval(k);
            if !cur.is_finite() || cur < prev {
                return Err(Error::invalid(format!(
                    "omega schedule {} decreases at k = {k}",
                    self.kind
                )));
            }
            prev = cur;
        }
        if prev <= self.eval(1) {
            return Err(Error::invalid(format!(
                "omega schedule {} does not grow on 1..={horizon}",
                self.kind
            )));
        }
        Ok(())
    }
}

impl fmt::Display for OmegaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

fn parse_kind(s: &str) -> Result<OmegaKind> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("eta:") {
        return Ok(OmegaKind::HalfSqrt(Box::new(parse_kind(rest)?)));
    }
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let num = |what: &str| -> Result<f64> {
        let a = arg.ok_or_else(|| Error::invalid(format!("omega preset '{what}' needs a parameter")))?;
        a.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::invalid(format!("bad omega parameter '{a}'")))
    };
    match name {
        "sqrt" => Ok(OmegaKind::Sqrt),
        "logpow" => {
            let alpha = num("logpow")?;
            if alpha <= 0.0 {
                return Err(Error::invalid("logpow exponent must be positive"));
            }
            Ok(OmegaKind::LogPow(alpha))
        }
        "constlog" | "const-plus-log" => Ok(OmegaKind::ConstPlusLog(num("constlog")?)),
        "const" => Ok(OmegaKind::Const(num("const")?)),
        other => Err(Error::invalid(format!("unknown omega preset '{other}'"))),
    }
}

impl FromStr for OmegaSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(OmegaSchedule::new(parse_kind(s)?))
    }
}
