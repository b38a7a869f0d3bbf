//! Closed-form specializations of the general construction.

use std::collections::BTreeSet;

use crate::cdc::CdcFamily;
use crate::encodings::{exotic_code, gray_code, moment_code, zigzag_code, Encoding, EncodingKind};
use crate::error::{Error, Result};
use crate::numerics::{canonical_direction, rat, RatVector, Rational};

use super::{check_convex, check_sizes, LinearFormulation, TwoSidedRow};

/// Planar encodings: one row per direction orthogonal to a code difference.
///
/// Codes that are collinear leave the relaxation unbounded along their line;
/// use [`super::build_general`] for those.
pub fn build_2d(fam: &CdcFamily, h: &Encoding) -> Result<LinearFormulation> {
    if h.r() != 2 {
        return Err(Error::Dimension { expected: 2, found: h.r() });
    }
    check_sizes(fam, h)?;
    check_convex(h)?;
    let mut dirs = BTreeSet::new();
    for i in 0..h.d() {
        for j in i + 1..h.d() {
            let c = h.code(j).sub(h.code(i));
            let b = RatVector(vec![c[1].clone(), -c[0].clone()]);
            dirs.insert(canonical_direction(&b)?);
        }
    }
    let mut f = LinearFormulation::new(fam.n(), 2, "2d");
    f.encoding = Some(h.kind());
    f.rows = dirs.into_iter().map(|b| TwoSidedRow::from_direction(fam, h.codes(), b)).collect();
    f.set_hull(h.codes());
    Ok(f)
}

/// Moment-curve codes: one row per `t ∈ 3..=2d−1` along `(t, −1)`.
pub fn build_moment_curve(fam: &CdcFamily) -> Result<LinearFormulation> {
    let d = fam.d();
    let h = moment_code(d)?;
    let mut f = LinearFormulation::new(fam.n(), 2, "moment");
    f.encoding = Some(EncodingKind::Moment);
    for t in 3..=(2 * d as i64 - 1) {
        let mut row = TwoSidedRow::from_direction(fam, h.codes(), RatVector::from_ints(&[t, -1]));
        row.label = Some(format!("t={t}"));
        f.rows.push(row);
    }
    f.set_hull(h.codes());
    Ok(f)
}

/// SOS2 with the exotic code: two rows, coefficients from consecutive codes.
pub fn build_sos2_exotic(d: usize) -> Result<LinearFormulation> {
    let h = exotic_code(d)?;
    let mut f = LinearFormulation::new(d + 1, 2, "sos2-exotic");
    f.encoding = Some(EncodingKind::Exotic);
    for k in 0..2 {
        let coord = |i: usize| h.code(i)[k].clone();
        let mut lower = RatVector::zeros(d + 1);
        let mut upper = RatVector::zeros(d + 1);
        lower[0] = coord(0);
        upper[0] = coord(0);
        for i in 1..d {
            let (a, b) = (coord(i - 1), coord(i));
            lower[i] = a.clone().min(b.clone());
            upper[i] = a.max(b);
        }
        lower[d] = coord(d - 1);
        upper[d] = coord(d - 1);
        let label = if k == 0 { "z1" } else { "z2" };
        f.rows.push(TwoSidedRow {
            direction: RatVector::unit(2, k),
            lower,
            upper,
            label: Some(label.into()),
        });
    }
    f.set_hull(h.codes());
    Ok(f)
}

/// Annulus rows: λ_{2i−1} and λ_{2i} share the coefficient min/max of
/// `b·h^i` and `b·h^{i+1}`, indices taken cyclically.
fn annulus_rows(h: &Encoding, dirs: Vec<(RatVector, String)>) -> Vec<TwoSidedRow> {
    let d = h.d();
    dirs.into_iter()
        .map(|(b, label)| {
            let vals: Vec<Rational> = h.codes().iter().map(|c| b.dot(c)).collect();
            let mut lower = RatVector::zeros(2 * d);
            let mut upper = RatVector::zeros(2 * d);
            for i in 0..d {
                let (a, c) = (&vals[i], &vals[(i + 1) % d]);
                let (lo, hi) = if a <= c { (a, c) } else { (c, a) };
                for v in [2 * i, 2 * i + 1] {
                    lower[v] = lo.clone();
                    upper[v] = hi.clone();
                }
            }
            TwoSidedRow { direction: b, lower, upper, label: Some(label) }
        })
        .collect()
}

/// The annulus family with a Gray, zig-zag or exotic code.
pub fn build_annulus(d: usize, kind: EncodingKind) -> Result<LinearFormulation> {
    let pow2 = |d: usize| -> Result<usize> {
        if d >= 2 && d.is_power_of_two() {
            Ok(d.trailing_zeros() as usize)
        } else {
            Err(Error::Formulation(format!("{kind} annulus needs d a power of two, got {d}")))
        }
    };
    let (h, dirs) = match kind {
        EncodingKind::Gray => {
            let r = pow2(d)?;
            let dirs = (0..r).map(|k| (RatVector::unit(r, k), format!("e{}", k + 1))).collect();
            (gray_code(r)?, dirs)
        }
        EncodingKind::Zigzag => {
            let r = pow2(d)?;
            let mut dirs: Vec<(RatVector, String)> =
                (0..r).map(|k| (RatVector::unit(r, k), format!("e{}", k + 1))).collect();
            for k in 1..=r {
                for l in k + 1..=r {
                    let mut b = RatVector::zeros(r);
                    b[k - 1] = rat(1, 1 << l);
                    b[l - 1] = -rat(1, 1 << k);
                    dirs.push((b, format!("b{k},{l}")));
                }
            }
            (zigzag_code(r)?, dirs)
        }
        EncodingKind::Exotic => {
            let h = exotic_code(d)?;
            let (first, last) = (h.code(0), h.code(d - 1));
            let w = RatVector(vec![&last[1] - &first[1], &first[0] - &last[0]]);
            let dirs = vec![
                (RatVector::from_ints(&[1, 0]), "e1".to_string()),
                (RatVector::from_ints(&[0, 1]), "e2".to_string()),
                (w, "w".to_string()),
            ];
            (h, dirs)
        }
        other => {
            return Err(Error::Formulation(format!("no annulus formulation for {other} codes")));
        }
    };
    if d < 5 {
        return Err(Error::Formulation(format!("annulus needs d ≥ 5, got {d}")));
    }
    let mut f = LinearFormulation::new(2 * d, h.r(), &format!("annulus-{kind}"));
    f.encoding = Some(kind);
    f.rows = annulus_rows(&h, dirs);
    f.set_hull(h.codes());
    Ok(f)
}
