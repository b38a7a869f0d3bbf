#![allow(dead_code)]

use cdcform::cdc::{annulus_instance, grid_triangulation_fixture, sos2_family, CdcFamily, VertexMap};
use cdcform::encodings::{exotic_code, gray_code_d, moment_code, zigzag_code_d, Encoding, EncodingKind};
use cdcform::formulation::{
    build_2d, build_annulus, build_general, build_moment_curve, build_sos2_exotic, LinearFormulation,
};
use cdcform::numerics::{int, RatVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub name: String,
    pub fam: CdcFamily,
    pub vm: Option<VertexMap>,
}

pub fn instances() -> Vec<Case> {
    let mut out: Vec<Case> = [4, 8, 16]
        .into_iter()
        .map(|d| Case { name: format!("sos2-{d}"), fam: sos2_family(d).unwrap(), vm: None })
        .collect();
    let (fam, vm) = annulus_instance(&int(2), &int(3), 8).unwrap();
    out.push(Case { name: "annulus-8".into(), fam, vm: Some(vm) });
    let (fam, vm) = grid_triangulation_fixture();
    out.push(Case { name: "grid".into(), fam, vm: Some(vm) });
    out
}

/// Every encoding of the right size: Gray, zig-zag, moment, and exotic when `4 | d`.
pub fn encodings(d: usize) -> Vec<Encoding> {
    let mut out = vec![gray_code_d(d).unwrap(), zigzag_code_d(d).unwrap(), moment_code(d).unwrap()];
    if d.is_multiple_of(4) {
        out.push(exotic_code(d).unwrap());
    }
    out
}

/// Every builder that applies to the case, with the encoding it targets.
pub fn builders(case: &Case) -> Vec<(String, LinearFormulation, Encoding)> {
    let d = case.fam.d();
    let mut out = Vec::new();
    for h in encodings(d) {
        out.push((format!("general-{}", h.kind()), build_general(&case.fam, &h).unwrap(), h.clone()));
        if h.r() == 2 {
            out.push((format!("2d-{}", h.kind()), build_2d(&case.fam, &h).unwrap(), h.clone()));
        }
    }
    out.push(("moment".into(), build_moment_curve(&case.fam).unwrap(), moment_code(d).unwrap()));
    if case.name.starts_with("sos2") && d.is_multiple_of(4) {
        out.push(("sos2-exotic".into(), build_sos2_exotic(d).unwrap(), exotic_code(d).unwrap()));
    }
    if case.name.starts_with("annulus") {
        for h in encodings(d) {
            if h.kind() != EncodingKind::Moment {
                out.push((format!("annulus-{}", h.kind()), build_annulus(d, h.kind()).unwrap(), h));
            }
        }
    }
    out
}

pub fn random_ints(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> RatVector {
    (0..n).map(|_| int(rng.gen_range(-bound..=bound))).collect()
}
