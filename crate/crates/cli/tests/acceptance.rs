//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prismatic::algebra::{make_pd_extension, make_poly_algebra, AlgebraElement, FreeModuleMap, GeneratorSpec, TruncatedAlgebra};
use prismatic::cech::{build_cech_double, compare_with_dr, Verdict};
use prismatic::coefficients::{cokernel_divisors, Modulus, ScalarMatrix};
use prismatic::complexes::{adjunction_map, koszul_transition, tensor, ChainMap, Complex};
use prismatic::corpus::{base_change_maps, instances, Instance};
use prismatic::delta::{crystalline_pd_frobenius, random_element, random_ideal_element, DeltaStructure, PrismMode};
use prismatic::duality::{build_pairing, build_pairing_with, verify_duality_iso};
use prismatic::higgs::{base_change, binom, dr_complex, HiggsModule};
use prismatic::poly::parse_element;
use prismatic::stratification::{check_cocycle, epsilon_from_theta, epsilon_inverse, theta_from_epsilon};
use prismatic_cli::strip_trailer;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    ensure(e < limit, || format!("took {e:.1?}, limit {limit:?}"))?;
    Ok(e)
}

// Integer-lift oracle for δ: elements of Z[T]/(T^cap) with i128 coefficients.

type Lift = BTreeMap<Vec<u32>, i128>;

fn lift(x: &AlgebraElement) -> Lift {
    let alg = x.algebra();
    x.support().map(|(u, c)| (alg.exponents(u).to_vec(), c as i128)).collect()
}

fn lift_add(a: &Lift, b: &Lift, sb: i128) -> Lift {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(e.clone()).or_insert(0) += sb * c;
    }
    out.retain(|_, c| *c != 0);
    out
}

fn lift_mul(a: &Lift, b: &Lift, caps: &[u32]) -> Lift {
    let mut out = Lift::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            if e.iter().zip(caps).all(|(x, c)| x < c) {
                *out.entry(e).or_insert(0) += ca * cb;
            }
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn lift_pow(a: &Lift, k: u64, caps: &[u32]) -> Lift {
    let mut out: Lift = [(vec![0; caps.len()], 1)].into_iter().collect();
    for _ in 0..k {
        out = lift_mul(&out, a, caps);
    }
    out
}

fn lift_scale(a: &Lift, k: i128) -> Lift {
    lift_add(&Lift::new(), a, k)
}

fn lift_eq_mod(a: &Lift, b: &Lift, m: i128) -> bool {
    lift_add(a, b, -1).values().all(|c| c.rem_euclid(m) == 0)
}

struct DeltaOracle {
    caps: Vec<u32>,
    p: u64,
    /// `φ(T_i) = T_i^p + p f_i` over the integers.
    phi_t: Vec<Lift>,
}

impl DeltaOracle {
    fn phi(&self, x: &Lift) -> Lift {
        let mut out = Lift::new();
        for (e, c) in x {
            let mut term: Lift = [(vec![0; self.caps.len()], *c)].into_iter().collect();
            for (i, &k) in e.iter().enumerate() {
                term = lift_mul(&term, &lift_pow(&self.phi_t[i], k as u64, &self.caps), &self.caps);
            }
            out = lift_add(&out, &term, 1);
        }
        out
    }

    fn delta(&self, x: &Lift) -> Result<Lift, String> {
        let diff = lift_add(&self.phi(x), &lift_pow(x, self.p, &self.caps), -1);
        let p = self.p as i128;
        if diff.values().any(|c| c % p != 0) {
            return Err("phi(x) - x^p is not divisible by p over the integers".into());
        }
        Ok(diff.into_iter().map(|(e, c)| (e, c / p)).collect())
    }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let rings: [(u64, u32, &[(&str, u32)], &[&str]); 6] = [
        (2, 2, &[("T", 3)], &["0"]),
        (2, 3, &[("T", 3)], &["T"]),
        (3, 2, &[("T", 3)], &["T^2"]),
        (3, 3, &[("T1", 2), ("T2", 2)], &["T2", "0"]),
        (5, 2, &[("T", 3)], &["T"]),
        (5, 3, &[("T", 2)], &["0"]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (p, n, gens, fs) in rings {
        let specs: Vec<_> = gens.iter().map(|&(g, c)| GeneratorSpec::polynomial(g, c)).collect();
        let alg = make_poly_algebra(Modulus::new(p, n).map_err(|e| e.to_string())?, &specs).map_err(|e| e.to_string())?;
        let f: Vec<AlgebraElement> = fs.iter().map(|s| parse_element(&alg, s).unwrap()).collect();
        let d = DeltaStructure::new(&alg, f.clone()).map_err(|e| e.to_string())?;
        let caps: Vec<u32> = gens.iter().map(|g| g.1).collect();
        let oracle = DeltaOracle {
            caps: caps.clone(),
            p,
            phi_t: (0..gens.len())
                .map(|i| lift_add(&lift_pow(&lift(&alg.generator(i)), p, &caps), &lift(&f[i]), p as i128))
                .collect(),
        };
        let low = (p as i128).pow(n - 1);
        let pi = p as i128;
        for _ in 0..200 {
            let (x, y) = (random_element(&alg, &mut rng), random_element(&alg, &mut rng));
            let (lx, ly) = (lift(&x), lift(&y));
            let (ox, oy) = (oracle.delta(&lx)?, oracle.delta(&ly)?);
            let ring = format!("p={p} N={n} {gens:?}");
            for (z, lz) in [
                (x.clone(), lx.clone()),
                (y.clone(), ly.clone()),
                (x.add(&y), lift_add(&lx, &ly, 1)),
                (x.mul(&y), lift_mul(&lx, &ly, &caps)),
            ] {
                ensure(lift_eq_mod(&lift(&d.delta(&z)), &oracle.delta(&lz)?, low), || {
                    format!("{ring}: delta({z}) disagrees with the integer lift")
                })?;
            }
            // δ(x+y) = δx + δy - Σ C(p,i)/p x^i y^{p-i}
            let mut rhs = lift_add(&ox, &oy, 1);
            let mut binom_c: i128 = 1;
            for i in 1..p {
                binom_c = binom_c * (pi - i as i128 + 1) / i as i128;
                let term = lift_mul(&lift_pow(&lx, i, &caps), &lift_pow(&ly, p - i, &caps), &caps);
                rhs = lift_add(&rhs, &term, -(binom_c / pi));
            }
            ensure(lift_eq_mod(&lift(&d.delta(&x.add(&y))), &rhs, low), || format!("{ring}: sum rule at {x}, {y}"))?;
            // δ(xy) = x^p δy + y^p δx + p δx δy
            let rhs = lift_add(
                &lift_add(
                    &lift_mul(&lift_pow(&lx, p, &caps), &oy, &caps),
                    &lift_mul(&lift_pow(&ly, p, &caps), &ox, &caps),
                    1,
                ),
                &lift_scale(&lift_mul(&ox, &oy, &caps), pi),
                1,
            );
            ensure(lift_eq_mod(&lift(&d.delta(&x.mul(&y))), &rhs, low), || format!("{ring}: product rule at {x}, {y}"))?;
            let (fx, fy) = (d.frobenius(&x), d.frobenius(&y));
            ensure(lift_eq_mod(&lift(&d.frobenius(&x.mul(&y))), &lift(&fx.mul(&fy)), low), || {
                format!("{ring}: phi(xy) != phi(x)phi(y)")
            })?;
            ensure(lift_eq_mod(&lift(&fx), &lift_pow(&lx, p, &caps), pi), || format!("{ring}: phi(x) != x^p mod p"))?;
        }
    }
    let e = within(t, Duration::from_secs(10))?;
    Ok(format!("6 rings x 200 random pairs against an integer-lift oracle in {e:.1?}"))
}

fn criterion_2(corpus: &[Instance]) -> Outcome {
    let t = Instant::now();
    for inst in corpus {
        let name = &inst.name;
        let err = |e: prismatic::Error| format!("{name}: {e}");
        let h = inst.module().map_err(err)?;
        let s = epsilon_from_theta(&h, inst.w).map_err(err)?;
        let h2 = theta_from_epsilon(&s, 0).map_err(err)?;
        ensure(h2.thetas() == h.thetas(), || format!("{name}: theta -> epsilon -> theta"))?;
        let s2 = epsilon_from_theta(&h2, inst.w).map_err(err)?;
        ensure(s2.eps == s.eps, || format!("{name}: epsilon -> theta -> epsilon"))?;
        let inv = epsilon_inverse(&s).map_err(err)?;
        let id = FreeModuleMap::identity(s.eps.algebra(), h.rank());
        ensure(inv.compose(&s.eps).unwrap() == id && s.eps.compose(&inv).unwrap() == id, || {
            format!("{name}: epsilon' is not inverse")
        })?;
        ensure(check_cocycle(&s).map_err(err)?.passed(), || format!("{name}: cocycle"))?;
    }
    let e = within(t, Duration::from_secs(60))?;
    Ok(format!("{} modules in {e:.1?}", corpus.len()))
}

fn criterion_3(corpus: &[Instance]) -> Outcome {
    let t = Instant::now();
    let mut checked = 0;
    for inst in corpus {
        let name = &inst.name;
        let err = |e: prismatic::Error| format!("{name}: {e}");
        let h = inst.module().map_err(err)?;
        let n = h.n() as u32;
        if inst.w < h.w_theta().unwrap() + n + 2 {
            continue;
        }
        let s = epsilon_from_theta(&h, inst.w).map_err(err)?;
        let d = build_cech_double(&h, &s, inst.w).map_err(err)?;
        let rep = compare_with_dr(&d).map_err(err)?;
        for k in 0..=n as i32 {
            ensure(rep.ca.get(&k) == rep.dr.get(&k), || format!("{name}: H^{k}(CA) != H^{k}(DR)"))?;
        }
        for c in rep.cone_ca.iter().chain(&rep.cone_dr) {
            ensure(c.window_exact && c.verdict == Verdict::Pass, || {
                format!("{name}: cone verdict {} in degree {}", c.verdict, c.degree)
            })?;
        }
        checked += 1;
    }
    ensure(checked >= 30, || format!("only {checked} instances qualify"))?;
    let e = within(t, Duration::from_secs(300))?;
    Ok(format!("{checked} instances in {e:.1?}"))
}

fn criterion_4(corpus: &[Instance]) -> Outcome {
    let mut rings = Vec::new();
    for inst in corpus {
        if !rings.contains(&inst.ring) {
            rings.push(inst.ring.clone());
        }
    }
    for ring in &rings {
        let alg = ring.algebra().map_err(|e| e.to_string())?;
        let n = ring.n();
        let len = ring.length().map_err(|e| e.to_string())?;
        let h = HiggsModule::trivial(&alg, 1, n);
        let dr = dr_complex(&h).map_err(|e| e.to_string())?.cohomology();
        let w = n as u32 + 2;
        let s = epsilon_from_theta(&h, w).map_err(|e| e.to_string())?;
        let ca = build_cech_double(&h, &s, w)
            .and_then(|d| d.ca_complex())
            .map_err(|e| e.to_string())?
            .cohomology_in(0, n as i32);
        for k in 0..=n {
            let want = binom(n, k) as u64 * len;
            let (a, b) = (dr[&(k as i32)].length(), ca[&(k as i32)].length());
            ensure(a == want && b == want, || {
                format!("{:?}: H^{k} lengths DR {a}, CA {b}, expected {want}", ring.gens)
            })?;
        }
    }
    Ok(format!("{} rings, DR and CA", rings.len()))
}

fn criterion_5(corpus: &[Instance]) -> Outcome {
    let mut controls = 0;
    for inst in corpus {
        let name = &inst.name;
        let err = |e: prismatic::Error| format!("{name}: {e}");
        let h = inst.module().map_err(err)?;
        let w = build_pairing(&h).map_err(err)?;
        let rep = verify_duality_iso(&w).map_err(err)?;
        ensure(rep.passed(), || format!("{name}: {rep:?}"))?;
        // Same twist, θ^T in place of -θ^T.
        let flipped: Vec<FreeModuleMap> = h.thetas().iter().map(|t| t.transpose()).collect();
        if flipped == w.dual.thetas() {
            continue;
        }
        let bad = HiggsModule::new(h.algebra(), h.rank(), flipped, h.n() as i32).map_err(err)?;
        let rep = verify_duality_iso(&build_pairing_with(&h, &bad).map_err(err)?).map_err(err)?;
        ensure(rep.chain_map_failure.is_some(), || format!("{name}: sign-flipped dual passed"))?;
        controls += 1;
    }
    ensure(controls > 0, || "no instance distinguishes the sign flip".into())?;
    Ok(format!("{} modules; {controls} sign-flipped controls rejected", corpus.len()))
}

fn commutes(f: &ChainMap) -> bool {
    let (s, t) = (f.source(), f.target());
    let lo = s.lo().min(t.lo()) - 1;
    let hi = s.hi().max(t.hi()) + 1;
    (lo..=hi).all(|i| {
        let a = t.diff(i).compose(&f.component(i)).unwrap();
        let b = f.component(i + 1).compose(&s.diff(i)).unwrap();
        a == b
    })
}

fn criterion_6(corpus: &[Instance]) -> Outcome {
    let mut maps = BTreeSet::new();
    let mut runs = 0;
    for inst in corpus {
        let h = inst.module().map_err(|e| e.to_string())?;
        for (label, f) in base_change_maps(&inst.ring).map_err(|e| e.to_string())? {
            let (_, cmp) = base_change(&h, &f).map_err(|e| format!("{} along {label}: {e}", inst.name))?;
            ensure(commutes(&cmp) && cmp.is_bijective(), || format!("{} along {label}", inst.name))?;
            if label != "identity" {
                maps.insert(format!("{:?} {label}", inst.ring));
            }
            runs += 1;
        }
    }
    ensure(maps.len() >= 10, || format!("only {} distinct ring maps", maps.len()))?;
    Ok(format!("{} distinct non-identity ring maps, {runs} comparisons", maps.len()))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut basis = 0;
    for (p, n, cap, w) in [(2u64, 3u32, 3u32, 4u32), (3, 2, 2, 5), (5, 2, 2, 7)] {
        let m = Modulus::new(p, n).unwrap();
        let r = make_poly_algebra(m, &[GeneratorSpec::polynomial("T", cap)]).unwrap();
        let base = DeltaStructure::trivial(&r).map_err(|e| e.to_string())?;
        let rpd = make_pd_extension(&r, 1, w).map_err(|e| e.to_string())?;
        let d = crystalline_pd_frobenius(&rpd, &base, PrismMode::Crystalline).map_err(|e| e.to_string())?;
        for i in 0..rpd.dim() {
            if rpd.pd_weight(i) == 0 {
                continue;
            }
            let fx = d.frobenius(&rpd.basis_element(i));
            ensure(fx.coeffs().iter().all(|c| c % p == 0), || {
                format!("p={p}: phi({}) = {fx} is not divisible by p", rpd.monomial_name(i))
            })?;
            basis += 1;
        }
        let fact = (1..=p).product::<u64>();
        let red = |x: &AlgebraElement| -> Vec<u64> { x.coeffs().iter().map(|c| c % p).collect() };
        for _ in 0..100 {
            let x = random_ideal_element(&rpd, &mut rng);
            let y = random_ideal_element(&rpd, &mut rng);
            let a = random_element(&rpd, &mut rng);
            let g = |z: &AlgebraElement| d.gamma_p(z).map_err(|e| e.to_string());
            let (gx, gy) = (g(&x)?, g(&y)?);
            ensure(red(&gx.scale(fact)) == red(&x.pow(p)), || format!("p={p}: p! gamma_p(x) != x^p"))?;
            ensure(red(&g(&a.mul(&x))?) == red(&a.pow(p).mul(&gx)), || format!("p={p}: gamma_p(ax)"))?;
            // γ_p(x+y) = γ_p(x) + γ_p(y) + Σ x^i y^{p-i} / (i! (p-i)!), mod p.
            let mut rhs = gx.add(&gy);
            for i in 1..p {
                let den = (1..=i).product::<u64>() * (1..=p - i).product::<u64>();
                let inv = (1..p).find(|k| (k * den) % p == 1).unwrap();
                rhs = rhs.add(&x.pow(i).mul(&y.pow(p - i)).scale(inv));
            }
            ensure(red(&g(&x.add(&y))?) == red(&rhs), || format!("p={p}: gamma_p addition formula"))?;
        }
    }
    Ok(format!("{basis} PD basis elements; 3 x 100 random gamma_p triples"))
}

/// Every `r x c` matrix over `Z/p^2`, `r, c <= 3`: the cokernel divisors
/// against the column span found by enumeration. Returns the count.
fn snf_exhaustive(p: u64) -> Result<u64, String> {
    let q = p * p;
    let m = Modulus::new(p, 2).unwrap();
    let mut count = 0u64;
    for r in 1..=3u32 {
        let size = q.pow(r) as usize;
        let digits: Vec<Vec<u64>> = (0..size)
            .map(|v| (0..r).map(|i| (v as u64 / q.pow(i)) % q).collect())
            .collect();
        let encode = |d: &[u64]| -> usize { d.iter().rev().fold(0u64, |acc, x| acc * q + x) as usize };
        let scale: Vec<Vec<usize>> = (0..q)
            .map(|k| digits.iter().map(|d| encode(&d.iter().map(|x| x * k % q).collect::<Vec<_>>())).collect())
            .collect();
        let add = |a: usize, b: usize| -> usize {
            let s: Vec<u64> = digits[a].iter().zip(&digits[b]).map(|(x, y)| (x + y) % q).collect();
            encode(&s)
        };
        let span_with = |set: &[bool], v: usize| -> Vec<bool> {
            let mut out = vec![false; size];
            for (s, &inside) in set.iter().enumerate() {
                if inside {
                    for k in 0..q as usize {
                        out[add(s, scale[k][v])] = true;
                    }
                }
            }
            out
        };
        for c in 1..=3u32 {
            // Enumerate all prefixes of c - 1 columns.
            let prefixes = (size as u64).pow(c - 1);
            for pre in 0..prefixes {
                let cols: Vec<usize> = (0..c - 1).map(|j| ((pre / (size as u64).pow(j)) % size as u64) as usize).collect();
                let mut span = vec![false; size];
                span[0] = true;
                for &v in &cols {
                    span = span_with(&span, v);
                }
                let mut pspan = vec![false; size];
                for (s, &inside) in span.iter().enumerate() {
                    if inside {
                        pspan[scale[p as usize][s]] = true;
                    }
                }
                let (ns, nps) = (
                    span.iter().filter(|x| **x).count() as u64,
                    pspan.iter().filter(|x| **x).count() as u64,
                );
                let mut data = vec![0u64; (r * c) as usize];
                for (j, &v) in cols.iter().enumerate() {
                    for i in 0..r as usize {
                        data[i * c as usize + j] = digits[v][i];
                    }
                }
                for last in 0..size {
                    let order = if span[last] {
                        1
                    } else if span[scale[p as usize][last]] {
                        p
                    } else {
                        q
                    };
                    let image = ns * order;
                    let p_image = nps * if pspan[scale[p as usize][last]] { 1 } else { p };
                    let a = p_image.ilog(p) as usize;
                    let b = image.ilog(p) as usize - 2 * a;
                    for i in 0..r as usize {
                        data[i * c as usize + c as usize - 1] = digits[last][i];
                    }
                    let mat = ScalarMatrix::from_raw(r as usize, c as usize, m, data.clone()).unwrap();
                    let e = cokernel_divisors(&mat);
                    let ex = e.exponents();
                    let (sa, sb) = (r as usize - ex.len(), ex.iter().filter(|&&x| x == 1).count());
                    if (sa, sb) != (a, b) {
                        return Err(format!("{r}x{c} over Z/{q}: {:?} gives {e}, span has Z/{q}^{a} + Z/{p}^{b}", data));
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

fn random_complex(alg: &Arc<TruncatedAlgebra>, rng: &mut ChaCha8Rng) -> Complex {
    let two = |rng: &mut ChaCha8Rng| {
        let (a, b) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let entries: Vec<AlgebraElement> = (0..a * b).map(|_| random_element(alg, rng)).collect();
        let d = FreeModuleMap::from_entries(alg, b, a, &entries).unwrap();
        Complex::new(alg, rng.gen_range(-1..=1), vec![a, b], vec![d]).unwrap()
    };
    match rng.gen_range(0..3) {
        0 => Complex::concentrated(alg, rng.gen_range(1..=2), rng.gen_range(-1..=1)),
        1 => two(rng),
        _ => {
            let a = two(rng);
            let b = Complex::concentrated(alg, 1, rng.gen_range(-1..=0));
            tensor(&a, &two(rng)).map(|t| tensor(&t, &b).unwrap()).unwrap()
        }
    }
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let n2 = snf_exhaustive(2)?;
    let n3 = snf_exhaustive(3)?;
    let snf_time = t.elapsed();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let algs = [
        make_poly_algebra(Modulus::new(2, 2).unwrap(), &[]).unwrap(),
        make_poly_algebra(Modulus::new(3, 1).unwrap(), &[GeneratorSpec::polynomial("T", 2)]).unwrap(),
    ];
    for audit in 0..50 {
        let alg = &algs[audit % 2];
        let (k, l, m) = (random_complex(alg, &mut rng), random_complex(alg, &mut rng), random_complex(alg, &mut rng));
        let (_, _, phi) = adjunction_map(&k, &l, &m).map_err(|e| format!("audit {audit}: {e}"))?;
        ensure(commutes(&phi) && phi.is_bijective(), || format!("audit {audit}: adjunction is not an isomorphism"))?;
    }

    let mut transitions = 0;
    for (p, n, gens, fs) in [
        (2u64, 2u32, &[("T", 4u32)][..], &["T"][..]),
        (3, 1, &[("T1", 3), ("T2", 3)], &["T1", "T2"]),
        (5, 2, &[("T1", 3), ("T2", 2)], &["T1 + T2", "5*T2"]),
    ] {
        let specs: Vec<_> = gens.iter().map(|&(g, c)| GeneratorSpec::polynomial(g, c)).collect();
        let alg = make_poly_algebra(Modulus::new(p, n).unwrap(), &specs).unwrap();
        let f: Vec<_> = fs.iter().map(|s| parse_element(&alg, s).unwrap()).collect();
        for k in 1..=3 {
            let map = koszul_transition(&alg, &f, k).map_err(|e| e.to_string())?;
            ensure(commutes(&map), || format!("Koszul transition {fs:?} at n={k}"))?;
            transitions += 1;
        }
    }
    Ok(format!(
        "SNF on {n2} matrices over Z/4 and {n3} over Z/9 ({snf_time:.0?}); 50 adjunction audits; {transitions} Koszul transitions"
    ))
}

fn criterion_9(corpus: &[Instance]) -> Outcome {
    for inst in corpus {
        let h = inst.module().map_err(|e| e.to_string())?;
        let dr = dr_complex(&h).map_err(|e| e.to_string())?;
        let n = h.n();
        ensure(dr.lo() == 0 && dr.hi() == n as i32, || format!("{}: degrees {}..{}", inst.name, dr.lo(), dr.hi()))?;
        for k in 0..=n as i32 {
            let want = binom(n, k as usize) * h.rank();
            let d = dr.diff(k);
            ensure(dr.rank(k) == want && d.cols() == want && d.rows() == dr.rank(k + 1), || {
                format!("{}: degree {k} is not free of rank {want}", inst.name)
            })?;
        }
    }
    Ok(format!("{} de Rham complexes free in [0, n]", corpus.len()))
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_prismatic");
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
    let run = |emit: &str| -> Result<String, String> {
        let out = Command::new(bin)
            .args(["run", "--emit", emit, "--corpus", dir])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.code() == Some(0), || format!("exit status {:?}", out.status.code()))?;
        Ok(String::from_utf8(out.stdout).map_err(|e| e.to_string())?)
    };
    for emit in ["text", "structured"] {
        let (a, b) = (run(emit)?, run(emit)?);
        ensure(strip_trailer(&a) == strip_trailer(&b), || format!("{emit} reports differ"))?;
        ensure(!a.is_empty(), || "empty report".into())?;
    }
    Ok("text and structured corpus reports byte-identical across two runs".into())
}

fn main() {
    let corpus = instances();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("delta-ring axiom suite", Box::new(criterion_1)),
        ("stratification equivalence", Box::new(|| criterion_2(&corpus))),
        ("cohomology comparison", Box::new(|| criterion_3(&corpus))),
        ("Hodge-Tate pattern", Box::new(|| criterion_4(&corpus))),
        ("duality", Box::new(|| criterion_5(&corpus))),
        ("base change", Box::new(|| criterion_6(&corpus))),
        ("crystalline Frobenius and gamma_p", Box::new(criterion_7)),
        ("homological core", Box::new(criterion_8)),
        ("perfect-complex proxy", Box::new(|| criterion_9(&corpus))),
        ("determinism", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(why) => {
                println!("FAIL criterion {} ({name}): {why}", i + 1);
                failed += 1;
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
