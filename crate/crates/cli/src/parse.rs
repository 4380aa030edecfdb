use std::str::FromStr;

use bsgeom::dynamics::{CompactBlock, RealInterval};
use bsgeom::nadic::{CloneBall, NAdic};
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::CliError;

/// Accepts `p`, `p/q` or a decimal such as `-0.375`.
pub fn rational(s: &str) -> Result<BigRational, CliError> {
    let s = s.trim();
    let bad = || CliError::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num = BigInt::from_str(&digits).map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let v = BigRational::new(num, den);
        return Ok(if neg { -v } else { v });
    }
    Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
}

/// A rational value, or an expansion `base:low:pre|period` when the text contains `:`.
pub fn nadic(s: &str, n: u32) -> Result<NAdic, CliError> {
    if s.contains(':') {
        let x: NAdic = s.parse()?;
        if x.base() != n {
            return Err(bsgeom::Error::BaseMismatch(x.base(), n).into());
        }
        return Ok(x);
    }
    Ok(NAdic::new(n, rational(s)?)?)
}

/// `center@height`, the clone of the given height containing `center`.
pub fn clone_ball(s: &str, n: u32) -> Result<CloneBall, CliError> {
    let (c, k) = s
        .split_once('@')
        .ok_or_else(|| CliError::Parse(format!("expected center@height, got {s:?}")))?;
    let k: i64 = k.trim().parse().map_err(|_| CliError::Parse(format!("bad height {k:?}")))?;
    Ok(CloneBall::containing(&nadic(c.trim(), n)?, k))
}

enum Factor {
    Real(RealInterval),
    Clone(CloneBall),
}

fn factor(s: &str, n: u32) -> Result<Factor, CliError> {
    if s.contains('@') {
        return Ok(Factor::Clone(clone_ball(s, n)?));
    }
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| CliError::Parse(format!("expected lo,hi or center@height, got {s:?}")))?;
    Ok(Factor::Real(RealInterval::new(rational(a)?, rational(b)?)?))
}

/// Three factors separated by `;`, e.g. `0,1;2,3;0@-1`.
/// `standard` and `control` name the two reference blocks.
pub fn block(s: &str, n: u32) -> Result<CompactBlock, CliError> {
    match s.trim() {
        "standard" => return Ok(CompactBlock::standard(n)?),
        "control" => return Ok(CompactBlock::standard_control()?),
        _ => {}
    }
    let parts: Vec<&str> = s.split(';').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(CliError::Parse(format!("a block has three factors, got {s:?}")));
    };
    let block = match (factor(a, n)?, factor(b, n)?, factor(c, n)?) {
        (Factor::Real(x), Factor::Real(y), Factor::Clone(z)) => CompactBlock::rrq(x, y, z)?,
        (Factor::Real(x), Factor::Clone(e), Factor::Clone(z)) => CompactBlock::rqq(x, e, z)?,
        (Factor::Real(x), Factor::Real(y), Factor::Real(z)) => CompactBlock::rrr(x, y, z)?,
        _ => return Err(CliError::Parse("factor order must be R,R,Q or R,Q,Q or R,R,R".into())),
    };
    Ok(block)
}

/// A point `x,y,zeta` of the fiber complex: plane coordinates and the leaf end.
pub fn fiber_point(s: &str, n: u32) -> Result<(f64, f64, NAdic), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    let [x, y, z] = parts.as_slice() else {
        return Err(CliError::Parse(format!("expected x,y,zeta, got {s:?}")));
    };
    let f = |t: &str| t.trim().parse::<f64>().map_err(|_| CliError::Parse(format!("bad coordinate {t:?}")));
    Ok((f(x)?, f(y)?, nadic(z.trim(), n)?))
}
