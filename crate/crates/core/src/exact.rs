//! Exact rational arithmetic helpers.
//!
//! Model data (measures, interface weights, theta tables) is stored as
//! `BigRational`. Every `f64` is itself a rational number, so converting user
//! input through [`q_from_f64`] loses nothing; the f64 views handed back by
//! the public API are the only lossy step, and tests bypass them via the
//! `_exact` variants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::Result;

pub type Q = BigRational;

/// Rational from an integer pair. Panics on zero denominator.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Exact conversion: every finite f64 is a dyadic rational.
pub fn q_from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn q_to_string(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p`, `p/q`, or a plain decimal like `-0.25`.
pub fn q_parse(s: &str) -> Result<Q> {
    let s = s.trim();
    let err = || Error::Parse {
        what: "rational",
        input: s.to_string(),
    };
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int: BigInt = if int == "-" || int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| err())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| err())?;
        let mag = int.abs() * &scale + frac;
        let signed = if neg { -mag } else { mag };
        return Ok(Q::new(signed, scale));
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(Q::from_integer(n))
}

/// 3^-k as an exact rational.
pub fn pow3_inv(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::from(3u32).pow(k))
}

// ---------------------------------------------------------------------------
// Small exact linear algebra over the integers.
//
// The extreme-point module solves thousands of tiny systems whose entries
// are 0/±1 (tie hyperplanes) or scaled theta increments. Fraction-free
// Gaussian elimination over BigInt keeps everything exact without the
// allocation churn of rational pivoting.
// ---------------------------------------------------------------------------

/// Rank of an integer matrix (rows of equal length).
pub fn int_rank(rows: &[Vec<BigInt>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..ncols {
        let pivot = (row..m.len()).find(|&r| !m[r][col].is_zero());
        let Some(p) = pivot else { continue };
        m.swap(row, p);
        let pv = m[row][col].clone();
        for r in row + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..ncols {
                let v = &m[r][c] * &pv - &m[row][c] * &factor;
                m[r][c] = v;
            }
            reduce_row(&mut m[r]);
        }
        row += 1;
        rank += 1;
        if row == m.len() {
            break;
        }
    }
    rank
}

/// Gauss–Jordan elimination in place; returns the pivot columns. After the
/// call, each pivot column is zero outside its pivot row.
fn jordan_reduce(m: &mut [Vec<BigInt>], ncols: usize) -> Vec<usize> {
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let pivot = (row..m.len()).find(|&r| !m[r][col].is_zero());
        let Some(p) = pivot else { continue };
        m.swap(row, p);
        let pv = m[row][col].clone();
        for r in 0..m.len() {
            if r == row || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in 0..ncols {
                let v = &m[r][c] * &pv - &m[row][c] * &factor;
                m[r][c] = v;
            }
            reduce_row(&mut m[r]);
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

/// Kernel vector with the first free column set to one and any others to
/// zero, rescaled to a primitive integer vector.
fn back_substitute(m: &[Vec<BigInt>], pivots: &[usize], ncols: usize) -> Vec<BigInt> {
    let free_col = (0..ncols).find(|c| !pivots.contains(c)).unwrap();
    let mut v: Vec<Q> = vec![Q::zero(); ncols];
    v[free_col] = Q::one();
    for (r, &pc) in pivots.iter().enumerate() {
        let num = &m[r][free_col];
        let den = &m[r][pc];
        v[pc] = -Q::new(num.clone(), den.clone());
    }
    clear_denominators(&v)
}

/// One-dimensional kernel of an integer matrix with `ncols` columns.
///
/// Returns a primitive integer vector spanning the kernel when the rows have
/// rank `ncols - 1`, `None` otherwise.
pub fn int_kernel_vector(rows: &[Vec<BigInt>], ncols: usize) -> Option<Vec<BigInt>> {
    if ncols == 0 {
        return None;
    }
    if rows.is_empty() {
        return if ncols == 1 {
            Some(vec![BigInt::one()])
        } else {
            None
        };
    }
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let pivots = jordan_reduce(&mut m, ncols);
    if pivots.len() != ncols - 1 {
        return None;
    }
    Some(back_substitute(&m, &pivots, ncols))
}

/// Some primitive kernel vector of an integer matrix, `None` exactly when
/// the rows have full column rank. The kernel may have any dimension.
pub fn int_kernel_any(rows: &[Vec<BigInt>], ncols: usize) -> Option<Vec<BigInt>> {
    if ncols == 0 {
        return None;
    }
    if rows.is_empty() {
        let mut v = vec![BigInt::zero(); ncols];
        v[0] = BigInt::one();
        return Some(v);
    }
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let pivots = jordan_reduce(&mut m, ncols);
    if pivots.len() == ncols {
        return None;
    }
    Some(back_substitute(&m, &pivots, ncols))
}

/// Scales a rational vector to a primitive integer vector (gcd 1, first
/// nonzero entry positive).
pub fn clear_denominators(v: &[Q]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = num_integer::lcm(lcm, x.denom().clone());
    }
    let mut out: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut g = BigInt::zero();
    for x in &out {
        g = num_integer::gcd(g, x.clone());
    }
    if !g.is_zero() && !g.is_one() {
        for x in &mut out {
            *x /= &g;
        }
    }
    if let Some(first) = out.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in &mut out {
                *x = -x.clone();
            }
        }
    }
    out
}

/// Rank of a rational matrix (clears denominators row by row; row scaling
/// preserves rank).
pub fn rational_rank(rows: &[Vec<Q>]) -> usize {
    let int_rows: Vec<Vec<BigInt>> = rows.iter().map(|r| clear_denominators(r)).collect();
    int_rank(&int_rows)
}

fn reduce_row(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in row.iter() {
        g = num_integer::gcd(g, x.clone());
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in row.iter_mut() {
        *x /= &g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in ["3/4", "-7/8", "5", "0", "-12"] {
            let v = q_parse(s).unwrap();
            assert_eq!(q_to_string(&v), s);
        }
        assert_eq!(q_parse("0.25").unwrap(), q(1, 4));
        assert_eq!(q_parse("-1.5").unwrap(), q(-3, 2));
        assert_eq!(q_parse(" 2 / 6 ").unwrap(), q(1, 3));
        assert!(q_parse("1/0").is_err());
        assert!(q_parse("abc").is_err());
        assert!(q_parse("1.2.3").is_err());
    }

    #[test]
    fn f64_conversion_is_exact() {
        let v = q_from_f64(0.1);
        assert_eq!(q_to_f64(&v), 0.1);
        assert_ne!(v, q(1, 10)); // 0.1 is not 1/10 in binary
    }

    #[test]
    fn kernel_of_simple_system() {
        // x0 - x1 = 0, x1 - x2 = 0 => kernel spanned by (1,1,1)
        let rows = vec![
            vec![BigInt::from(1), BigInt::from(-1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1), BigInt::from(-1)],
        ];
        let v = int_kernel_vector(&rows, 3).unwrap();
        assert_eq!(v, vec![BigInt::from(1); 3]);
    }

    #[test]
    fn kernel_rejects_full_rank() {
        let rows = vec![
            vec![BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ];
        assert!(int_kernel_vector(&rows, 2).is_none());
    }

    #[test]
    fn kernel_any_handles_higher_dimensional_kernels() {
        // Single equation x0 + x1 + x2 = 0 has a 2-dimensional kernel.
        let rows = vec![vec![BigInt::from(1); 3]];
        let v = int_kernel_any(&rows, 3).unwrap();
        assert_eq!(&v[0] + &v[1] + &v[2], BigInt::from(0));
        assert!(v.iter().any(|x| !x.is_zero()));
        assert!(int_kernel_vector(&rows, 3).is_none());
        // Full rank still yields nothing.
        let eye = vec![
            vec![BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ];
        assert!(int_kernel_any(&eye, 2).is_none());
    }

    #[test]
    fn rank_counts_independent_rows() {
        let rows = vec![
            vec![BigInt::from(1), BigInt::from(2), BigInt::from(3)],
            vec![BigInt::from(2), BigInt::from(4), BigInt::from(6)],
            vec![BigInt::from(0), BigInt::from(1), BigInt::from(1)],
        ];
        assert_eq!(int_rank(&rows), 2);
    }
}
