//! JSON and plain-text renderings of a formulation.

use std::fmt::Write;

use num_traits::{One, Signed, Zero};

use super::LinearFormulation;
use crate::error::{Error, Result};
use crate::numerics::{format_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Text,
}

/// `coeffs` as a linear expression in `name1, name2, ...`.
pub fn linear_expression(coeffs: &[Rational], name: &str) -> String {
    let mut out = String::new();
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let sign = if c.is_negative() { "-" } else { "+" };
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        if !mag.is_one() {
            let _ = write!(out, "{} ", format_rational(&mag));
        }
        let _ = write!(out, "{name}{}", j + 1);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn text(f: &LinearFormulation) -> String {
    let mut s = String::new();
    let enc = f.encoding.map_or("none".to_string(), |e| e.to_string());
    let _ = writeln!(s, "# builder {} encoding {} n {} r {} rows {}", f.builder, enc, f.n, f.r, f.rows.len());
    for (i, row) in f.rows.iter().enumerate() {
        let label = row.label.as_ref().map_or(String::new(), |l| format!(" [{l}]"));
        let _ = writeln!(
            s,
            "row {}{}: {} <= {} <= {}",
            i + 1,
            label,
            linear_expression(&row.lower, "l"),
            linear_expression(&row.direction, "z"),
            linear_expression(&row.upper, "l"),
        );
    }
    for eq in &f.hull_equations {
        let _ = writeln!(s, "hull: {} = {}", linear_expression(&eq.a, "z"), format_rational(&eq.beta));
    }
    if f.has_simplex {
        let _ = writeln!(s, "simplex: l1 + ... + l{} = 1, l >= 0", f.n);
    }
    for &v in &f.zero_components {
        let _ = writeln!(s, "bound: l{} <= 0", v + 1);
    }
    if let Some(bounds) = &f.z_bounds {
        for (k, b) in bounds.iter().enumerate() {
            let lo = b.lower.as_ref().map_or("-inf".into(), format_rational);
            let hi = b.upper.as_ref().map_or("inf".into(), format_rational);
            let _ = writeln!(s, "bound: {lo} <= z{} <= {hi}", k + 1);
        }
    }
    s
}

pub fn export(f: &LinearFormulation, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => serde_json::to_string_pretty(f).expect("formulation serializes"),
        ExportFormat::Text => text(f),
    }
}

pub fn import_json(doc: &str) -> Result<LinearFormulation> {
    serde_json::from_str(doc).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdc::{grid_triangulation_fixture, CdcFamily};
    use crate::encodings::{moment_code, Encoding, EncodingKind};
    use crate::formulation::{build_general, build_moment_curve};
    use crate::numerics::{int, rat, RatVector};

    #[test]
    fn expressions() {
        assert_eq!(linear_expression(&[int(5), int(-1)], "z"), "5 z1 - z2");
        assert_eq!(linear_expression(&[int(0), rat(-1, 2), int(1)], "l"), "-1/2 l2 + l3");
        assert_eq!(linear_expression(&[int(0)], "l"), "0");
    }

    #[test]
    fn json_roundtrip() {
        let (fam, _) = grid_triangulation_fixture();
        let f = build_moment_curve(&fam).unwrap();
        let back = import_json(&export(&f, ExportFormat::Json)).unwrap();
        assert_eq!(back, f);
        assert!(import_json("{").is_err());
    }

    #[test]
    fn text_contains_grid_rows() {
        let (fam, _) = grid_triangulation_fixture();
        let t = export(&build_moment_curve(&fam).unwrap(), ExportFormat::Text);
        assert!(t.contains("5 z1 - z2 <= 4 l1 + 4 l2 + 6 l3 + 4 l4 + 6 l5 + 6 l6 + 4 l7 + 6 l8 - 24 l9"));
        assert!(t.contains("13 z1 - z2 <= 12 l1 + 42 l2 + 42 l3 + 42 l4 + 42 l5 + 40 l6 + 40 l7 + 40 l8 + 40 l9"));
    }

    #[test]
    fn single_alternative_has_no_rows() {
        let fam = CdcFamily::new(3, vec![vec![0, 1, 2]]).unwrap();
        let f = build_general(&fam, &moment_code(1).unwrap()).unwrap();
        let t = export(&f, ExportFormat::Text);
        assert!(t.contains("rows 0"));
        assert!(!t.contains("row 1"));
        let h = Encoding::new(EncodingKind::Custom, vec![RatVector::from_ints(&[0])]).unwrap();
        assert_eq!(build_general(&fam, &h).unwrap().rows.len(), 0);
    }
}
