//! The duality pairing `DR(M^∨{n}) ⊗ DR(M) -> Ω^n` and the induced map
//! `Φ : DR(M^∨{n}) -> Hom(DR(M), Ω^n)[-n]`.

use std::collections::BTreeMap;

use crate::algebra::FreeModuleMap;
use crate::coefficients::ElementaryDivisors;
use crate::complexes::{hom_complex, subsets, Complex};
use crate::higgs::{dr_complex, dual, twist, HiggsModule};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct PairingWitness {
    pub module: HiggsModule,
    pub dual: HiggsModule,
    /// `DR(M^∨{n})`.
    pub source: Complex,
    /// `Hom(DR(M), Ω^n)[-n]`.
    pub target: Complex,
    /// `Φ^i`, which is also the Gram matrix of the degree `(i, n - i)` pairing.
    pub phi: BTreeMap<i32, FreeModuleMap>,
}

/// Sign of `dT_S ∧ dT_{S'}` against `dT_1 ∧ … ∧ dT_n`, zero unless `S'` is
/// the complement of `S`.
fn wedge_sign(s: &[usize], t: &[usize], n: usize) -> i64 {
    if s.len() + t.len() != n || s.iter().any(|x| t.contains(x)) {
        return 0;
    }
    let inversions = s.iter().map(|&a| t.iter().filter(|&&b| b < a).count()).sum::<usize>();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Pairing against the canonical dual `M^∨{n}`.
pub fn build_pairing(h: &HiggsModule) -> Result<PairingWitness> {
    let hv = twist(&dual(h), h.n() as i32);
    build_pairing_with(h, &hv)
}

/// Pairing against a supplied dual; its twist tag must complement `h`'s.
pub fn build_pairing_with(h: &HiggsModule, hv: &HiggsModule) -> Result<PairingWitness> {
    let n = h.n();
    if hv.twist_tag() + h.twist_tag() != n as i32 {
        return Err(Error::Invalid(format!(
            "twist tags {} and {} do not add up to {n}",
            hv.twist_tag(),
            h.twist_tag()
        )));
    }
    if hv.rank() != h.rank() || hv.n() != n {
        return Err(Error::Shape("dual has the wrong shape".into()));
    }
    let alg = h.algebra();
    let r = h.rank();
    let source = dr_complex(hv)?;
    let dr = dr_complex(h)?;
    let omega = Complex::concentrated(alg, 1, 0);
    let target = hom_complex(&dr, &omega)?.shift(-(n as i32));
    let mut phi = BTreeMap::new();
    for i in 0..=n {
        let (si, ti) = (subsets(n, i), subsets(n, n - i));
        let mut f = FreeModuleMap::zeros(alg, target.rank(i as i32), source.rank(i as i32));
        for (a, s) in si.iter().enumerate() {
            for (c, t) in ti.iter().enumerate() {
                let sg = wedge_sign(s, t, n);
                if sg == 0 {
                    continue;
                }
                for b in 0..r {
                    f.set(c * r + b, a * r + b, &alg.constant(sg));
                }
            }
        }
        phi.insert(i as i32, f);
    }
    Ok(PairingWitness {
        module: h.clone(),
        dual: hv.clone(),
        source,
        target,
        phi,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityReport {
    /// First degree `i` with `d Φ^i != Φ^{i+1} d`.
    pub chain_map_failure: Option<i32>,
    /// First degree where `Φ` is not bijective.
    pub bijectivity_failure: Option<i32>,
}

impl DualityReport {
    pub fn passed(&self) -> bool {
        self.chain_map_failure.is_none() && self.bijectivity_failure.is_none()
    }
}

pub fn verify_duality_iso(w: &PairingWitness) -> Result<DualityReport> {
    let n = w.module.n() as i32;
    let alg = w.module.algebra();
    let comp = |i: i32| -> FreeModuleMap {
        w.phi.get(&i).cloned().unwrap_or_else(|| {
            FreeModuleMap::zeros(alg, w.target.rank(i), w.source.rank(i))
        })
    };
    let mut chain_map_failure = None;
    for i in -1..=n {
        let a = w.target.diff(i).compose(&comp(i))?;
        let b = comp(i + 1).compose(&w.source.diff(i))?;
        if a != b {
            chain_map_failure = Some(i);
            break;
        }
    }
    let mut bijectivity_failure = None;
    for i in 0..=n {
        let f = comp(i).restrict_scalars();
        let full = f.rows() as u64 * alg.modulus().precision() as u64;
        if f.rows() != f.cols() || crate::coefficients::image_length(&f) != full {
            bijectivity_failure = Some(i);
            break;
        }
    }
    Ok(DualityReport {
        chain_map_failure,
        bijectivity_failure,
    })
}

/// `H^i(DR(M^∨{n}))` against `H^{n-i}(DR(M))`.
pub fn cohomology_duality_table(
    w: &PairingWitness,
) -> Result<Vec<(i32, ElementaryDivisors, ElementaryDivisors)>> {
    let n = w.module.n() as i32;
    let hv = w.source.cohomology();
    let hm = dr_complex(&w.module)?.cohomology();
    Ok((0..=n)
        .map(|i| (i, hv[&i].clone(), hm[&(n - i)].clone()))
        .collect())
}
