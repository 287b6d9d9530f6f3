//! Lie shadows over `Z/p^r`, shadow-preserving lifts, and the non-existence experiment for
//! `sl_4`.

use std::collections::HashSet;

use thiserror::Error;

use crate::arith::Zpr;
use crate::lattice::{sl4, sl4_basis, LatticeError, LieLattice, Sl4Element};
use crate::linalg::{module_kernel, rref_in_place, smith_normal_form, snf_exponents_in_place, ModMatrix, Subspace};
use crate::scan::{par_fold_points, point_count};

/// Exhaustive lift scans above this many lifts are refused.
pub const MAX_LIFTS: u128 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShadowError {
    #[error("level must be at least 1")]
    BadLevel,
    #[error("scan of {lifts} lifts exceeds the limit of {limit}")]
    TooLarge { lifts: u128, limit: u128 },
    #[error("element file: {0}")]
    Parse(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The shadow of an element: the span of the reductions mod `p` of its centralizer module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowRecord {
    pub level: u32,
    pub element: Vec<u64>,
    pub shadow: Subspace,
}

impl ShadowRecord {
    pub fn dim(&self) -> usize {
        self.shadow.dim()
    }
}

/// Shadow of `x` (coordinates mod `p^r`) in any lattice.
pub fn shadow_of(l: &LieLattice, x: &[u64], ring: Zpr) -> Subspace {
    let p = ring.p();
    let gens: Vec<Vec<u64>> =
        module_kernel(&l.ad_matrix(x, ring)).row_vecs().into_iter().map(|g| g.iter().map(|v| v % p).collect()).collect();
    Subspace::span(l.dim(), p, &gens)
}

pub fn lie_shadow(a: &Sl4Element) -> ShadowRecord {
    let coords = a.coords();
    let shadow = shadow_of(sl4(), &coords, a.ring());
    ShadowRecord { level: a.ring().level(), element: coords, shadow }
}

/// The linear condition on `z` for `x + p^r z` to be shadow-preserving. With `U ad(x) V = D`
/// at level `r + 1` and `T` the slots whose exponent is at least `r`, the lift keeps every
/// shadow direction iff `D_TT / p^r + (U ad(z) V)_TT = 0 mod p`.
#[derive(Debug, Clone)]
pub struct SpLiftSystem {
    pub d: usize,
    pub p: u64,
    /// `dim Sh(x)`.
    pub shadow_dim: usize,
    /// Rows `(coefficients of z | right-hand side)` over `F_p`.
    pub rows: Vec<Vec<u64>>,
}

impl SpLiftSystem {
    pub fn new(l: &LieLattice, x: &[u64], ring: Zpr) -> Self {
        let r = ring.level();
        let p = ring.p();
        let d = l.dim();
        let up = ring.with_level(r + 1).expect("level");
        let f = ring.residue_field();
        let snf = smith_normal_form(&l.ad_matrix(x, up));
        let t: Vec<usize> = (0..d).filter(|&i| snf.exponents[i] >= r).collect();
        let ads: Vec<ModMatrix> = (0..d)
            .map(|k| {
                let mut e = vec![0u64; d];
                e[k] = 1;
                l.ad_matrix(&e, f)
            })
            .collect();
        let mut rows = Vec::new();
        for &i in &t {
            for &j in &t {
                let mut row: Vec<u64> = ads
                    .iter()
                    .map(|m| {
                        let mut acc = 0u64;
                        for a in 0..d {
                            let ua = snf.u.get(i, a) % p;
                            if ua == 0 {
                                continue;
                            }
                            for b in 0..d {
                                acc = f.add(acc, f.mul(ua, f.mul(m.get(a, b), snf.v.get(b, j) % p)));
                            }
                        }
                        acc
                    })
                    .collect();
                let dij = if i == j && snf.exponents[i] == r { 1 } else { 0 };
                row.push(f.neg(dij));
                rows.push(row);
            }
        }
        SpLiftSystem { d, p, shadow_dim: t.len(), rows }
    }

    /// `(consistent, rank of the linear part)`.
    pub fn solve(&self) -> (bool, usize) {
        if self.rows.is_empty() {
            return (true, 0);
        }
        let f = Zpr::field(self.p).expect("odd prime");
        let n = self.rows.len();
        let mut data: Vec<u64> = self.rows.concat();
        let piv = rref_in_place(&mut data, n, self.d + 1, &f);
        let consistent = !piv.contains(&self.d);
        (consistent, piv.len() - usize::from(!consistent))
    }

    pub fn count(&self) -> u128 {
        match self.solve() {
            (true, rank) => point_count(self.p, self.d - rank),
            (false, _) => 0,
        }
    }

    /// Whether `z` satisfies the system.
    pub fn accepts(&self, z: &[u64]) -> bool {
        let p = self.p;
        self.rows.iter().all(|row| {
            let s: u64 = row[..self.d].iter().zip(z).map(|(a, b)| a * b).sum::<u64>() % p;
            s == row[self.d]
        })
    }
}

/// Shadow-preserving lift count of `x` from the linear condition.
pub fn sp_lift_count(l: &LieLattice, x: &[u64], ring: Zpr) -> u128 {
    SpLiftSystem::new(l, x, ring).count()
}

/// `dim [s, s]` for the shadow `s` of `x`.
pub fn shadow_derived_dim(l: &LieLattice, x: &[u64], ring: Zpr) -> usize {
    let s = shadow_of(l, x, ring);
    let f = ring.residue_field();
    let b = s.basis();
    let mut br = Vec::new();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            br.push(l.bracket_mod(&b[i], &b[j], &f));
        }
    }
    Subspace::span(l.dim(), ring.p(), &br).dim()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// Every lift: divisor count first, then subspace comparison on survivors.
    Full,
    /// Only lifts accepted by the linear condition are compared as subspaces.
    Filtered,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftScan {
    pub level: u32,
    pub shadow_dim: usize,
    pub lifts_examined: u128,
    pub sp_lift_count: u128,
    /// The smallest few `z` (as vectors in `F_p^d`) giving shadow-preserving lifts.
    pub witnesses_sample: Vec<Vec<u64>>,
}

const WITNESSES: usize = 8;

/// Enumerates the lifts `x + p^r z`, `z in F_p^d`, and counts those with equal shadow.
pub fn shadow_preserving_lifts(l: &LieLattice, x: &[u64], ring: Zpr, mode: ScanMode) -> Result<LiftScan, ShadowError> {
    let r = ring.level();
    if r == 0 {
        return Err(ShadowError::BadLevel);
    }
    let (p, d) = (ring.p(), l.dim());
    let lifts = point_count(p, d);
    if lifts > MAX_LIFTS {
        return Err(ShadowError::TooLarge { lifts, limit: MAX_LIFTS });
    }
    let up = ring.with_level(r + 1).expect("level");
    let base_shadow = shadow_of(l, x, ring);
    let e = base_shadow.dim();
    let base = l.ad_matrix(x, up);
    let pr = ring.modulus();
    let steps: Vec<Vec<u64>> = (0..d)
        .map(|k| {
            let mut v = vec![0u64; d];
            v[k] = pr;
            l.ad_matrix(&v, up).data().to_vec()
        })
        .collect();
    let system = (mode == ScanMode::Filtered).then(|| SpLiftSystem::new(l, x, ring));
    let (count, mut wit, _, _) = par_fold_points(
        p,
        d,
        || (0u128, Vec::new(), vec![0u64; d * d], Vec::new()),
        |(n, wit, buf, ex), z| {
            if let Some(sys) = &system {
                if !sys.accepts(z) {
                    return;
                }
            } else {
                buf.copy_from_slice(base.data());
                for (k, &zk) in z.iter().enumerate() {
                    for _ in 0..zk {
                        for (b, s) in buf.iter_mut().zip(&steps[k]) {
                            *b = up.add(*b, *s);
                        }
                    }
                }
                snf_exponents_in_place(buf, d, d, &up, ex);
                if ex.iter().filter(|&&v| v > r).count() != e {
                    return;
                }
            }
            let y: Vec<u64> = x.iter().zip(z).map(|(&a, &b)| (a + pr * b) % up.modulus()).collect();
            if shadow_of(l, &y, up) == base_shadow {
                *n += 1;
                if wit.len() < WITNESSES {
                    wit.push(z.to_vec());
                }
            }
        },
        |a, b| {
            let mut w = a.1;
            w.extend(b.1);
            w.sort();
            w.truncate(WITNESSES);
            (a.0 + b.0, w, a.2, a.3)
        },
    );
    wit.sort();
    Ok(LiftScan { level: r, shadow_dim: e, lifts_examined: lifts, sp_lift_count: count, witnesses_sample: wit })
}

/// Parses 16 whitespace-separated integers (row-major); `#` starts a comment.
pub fn parse_element(text: &str, ring: Zpr) -> Result<Sl4Element, ShadowError> {
    let nums: Vec<i64> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(|t| t.parse::<i64>().map_err(|_| ShadowError::Parse(format!("not an integer: {t}"))))
        .collect::<Result<_, _>>()?;
    let m: [i64; 16] =
        nums.try_into().map_err(|v: Vec<i64>| ShadowError::Parse(format!("expected 16 entries, found {}", v.len())))?;
    Ok(Sl4Element::new(m, ring)?)
}

const EXAMPLE_Z: &str = include_str!("../data/example_z.txt");

/// The example element over `Z/27`.
pub fn example_z() -> Sl4Element {
    parse_element(EXAMPLE_Z, Zpr::new(3, 3).expect("3 is prime")).expect("bundled data parses")
}

/// `e12 + e34 + p(e13 + e24)` at the given level.
pub fn element_b(p: u64, level: u32) -> Sl4Element {
    let z = Zpr::new(p, level).expect("odd prime");
    let pi = z.from_i64(p as i64) as i64;
    Sl4Element::new([0, 1, pi, 0, 0, 0, 0, pi, 0, 0, 0, 1, 0, 0, 0, 0], z).expect("traceless")
}

/// Module-level facts about the centralizer of `b` at a working level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentralizerSignature {
    pub level: u32,
    /// Exponents of `ad(b)`, ascending.
    pub ad_exponents: Vec<u32>,
    /// Number of centralizer generators of full order.
    pub rank: usize,
    /// Exponents below the working level of the derived module's generator matrix.
    pub derived_exponents: Vec<u32>,
}

pub fn centralizer_signature(x: &Sl4Element) -> CentralizerSignature {
    let ring = x.ring();
    let k = ring.level();
    let l = sl4();
    let coords = x.coords();
    let snf = smith_normal_form(&l.ad_matrix(&coords, ring));
    let full: Vec<Vec<u64>> =
        (0..15).filter(|&i| snf.exponents[i] == k).map(|i| (0..15).map(|row| snf.v.get(row, i)).collect()).collect();
    let mut br = Vec::new();
    for i in 0..full.len() {
        for j in i + 1..full.len() {
            br.push(l.bracket_mod(&full[i], &full[j], &ring));
        }
    }
    let derived_exponents = if br.is_empty() {
        vec![]
    } else {
        smith_normal_form(&ModMatrix::from_rows(ring, 15, &br)).exponents.into_iter().filter(|&e| e < k).collect()
    };
    CentralizerSignature { level: k, ad_exponents: snf.exponents.clone(), rank: full.len(), derived_exponents }
}

/// Coordinates (`f21`, `f43`, `f41`) re-solved by Newton iteration in the family; the other
/// twelve are free. With this choice every correction stays in `p^3`.
pub const BOUND_COORDS: [usize; 3] = [9, 11, 14];

fn mat_mul(a: &[u64], b: &[u64], z: &Zpr) -> Vec<u64> {
    let mut out = vec![0u64; 16];
    for i in 0..4 {
        for k in 0..4 {
            let x = a[i * 4 + k];
            if x == 0 {
                continue;
            }
            for j in 0..4 {
                out[i * 4 + j] = z.add(out[i * 4 + j], z.mul(x, b[k * 4 + j]));
            }
        }
    }
    out
}

/// `X^3 - c2 X^2 - c1 X - c0 I`, which vanishes exactly on non-regular matrices with the right
/// coefficients.
fn nonregular_residual(x: &[u64], c: &[u64; 3], z: &Zpr) -> Vec<u64> {
    let x2 = mat_mul(x, x, z);
    let x3 = mat_mul(&x2, x, z);
    (0..16)
        .map(|i| {
            let id = if i % 5 == 0 { c[0] } else { 0 };
            z.sub(z.sub(z.sub(x3[i], z.mul(c[2], x2[i])), z.mul(c[1], x[i])), id)
        })
        .collect()
}

/// Solves `x^3 = c2 x^2 + c1 x + c0` near `start` by Newton iteration in the coordinates
/// `bound` and `c`, working mod `p^level`. Returns the coordinates if the residual vanishes to
/// `target` digits.
pub fn newton_nonregular(start: &[u64], bound: [usize; 3], p: u64, level: u32, target: u32) -> Option<Vec<u64>> {
    let z = Zpr::new(p, level).ok()?;
    let basis = sl4_basis();
    let e: Vec<Vec<u64>> = bound.iter().map(|&k| basis.matrix(k).iter().map(|&v| z.from_i64(v)).collect()).collect();
    let mut x = start.to_vec();
    let mut c = [0u64; 3];
    for _ in 0..4 * level {
        let m = basis.element_mod(&x, &z).ok()?;
        let f = nonregular_residual(&m, &c, &z);
        if f.iter().all(|&v| z.valuation(v) >= target) {
            return Some(x);
        }
        // Jacobian columns: d/dx_k and d/dc_j.
        let m2 = mat_mul(&m, &m, &z);
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(6);
        for ek in &e {
            let t1 = mat_mul(ek, &m2, &z);
            let t2 = mat_mul(&mat_mul(&m, ek, &z), &m, &z);
            let t3 = mat_mul(&m2, ek, &z);
            let t4 = mat_mul(ek, &m, &z);
            let t5 = mat_mul(&m, ek, &z);
            cols.push(
                (0..16)
                    .map(|i| {
                        let s = z.add(z.add(t1[i], t2[i]), t3[i]);
                        let s = z.sub(s, z.mul(c[2], z.add(t4[i], t5[i])));
                        z.sub(s, z.mul(c[1], ek[i]))
                    })
                    .collect(),
            );
        }
        let id: Vec<u64> = (0..16).map(|i| if i % 5 == 0 { 1 } else { 0 }).collect();
        for power in [&id, &m, &m2] {
            cols.push(power.iter().map(|&v| z.neg(v)).collect());
        }
        let j: Vec<u64> = (0..16).flat_map(|i| cols.iter().map(move |col| col[i])).collect();
        let snf = smith_normal_form(&ModMatrix::from_raw(16, 6, z, j));
        let rhs: Vec<u64> = f.iter().map(|&v| z.neg(v)).collect();
        let y = snf.u.apply(&rhs);
        let mut dprime = vec![0u64; 6];
        for i in 0..6 {
            let ex = snf.exponents[i];
            if ex < level {
                dprime[i] = (y[i] / z.p_pow(ex)) % z.modulus();
            }
        }
        let delta = snf.v.apply(&dprime);
        for (k, &idx) in bound.iter().enumerate() {
            x[idx] = z.add(x[idx], delta[k]);
        }
        for k in 0..3 {
            c[k] = z.add(c[k], delta[3 + k]);
        }
    }
    None
}

/// Report of the constructed family of lifts that themselves have shadow-preserving lifts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NewtonFamily {
    pub attempted: u128,
    pub converged: u128,
    /// Level-4 reductions that are shadow-preserving lifts of `red_3(b)`.
    pub sp_lifts_of_base: u128,
    /// Those whose level-5 reduction is a shadow-preserving lift of the level-4 one.
    pub admitting: u128,
    pub distinct: u128,
}

impl NewtonFamily {
    pub fn certifies(&self, expected: u128) -> bool {
        self.attempted == expected
            && self.converged == expected
            && self.sp_lifts_of_base == expected
            && self.admitting == expected
            && self.distinct == expected
    }
}

/// For every `t in F_p^12`, perturbs the free coordinates of `b` by `p^3 t`, re-solves the
/// bound coordinates by Newton iteration, and certifies the result by shadow comparisons at
/// levels 3, 4 and 5. `limit` truncates the enumeration for quick runs.
pub fn newton_family(p: u64, limit: Option<u128>) -> NewtonFamily {
    const WORK: u32 = 10;
    let l = sl4();
    let zw = Zpr::new(p, WORK).expect("odd prime");
    let z3 = zw.with_level(3).unwrap();
    let z4 = zw.with_level(4).unwrap();
    let z5 = zw.with_level(5).unwrap();
    let b = element_b(p, WORK).coords();
    let sh3 = shadow_of(l, &b, z3);
    let free: Vec<usize> = (0..15).filter(|k| !BOUND_COORDS.contains(k)).collect();
    let total = point_count(p, free.len());
    let n = limit.map_or(total, |m| m.min(total));
    let (mut fam, reductions) = par_fold_points(
        p,
        free.len(),
        || (NewtonFamily::default(), Vec::new()),
        |(fam, red), t| {
            let idx = t.iter().rev().fold(0u128, |acc, &v| acc * p as u128 + v as u128);
            if idx >= n {
                return;
            }
            fam.attempted += 1;
            let mut start = b.clone();
            for (&k, &tk) in free.iter().zip(t) {
                start[k] = zw.add(start[k], zw.mul(z3.modulus(), tk));
            }
            let Some(x) = newton_nonregular(&start, BOUND_COORDS, p, WORK, 6) else { return };
            fam.converged += 1;
            let x4: Vec<u64> = x.iter().map(|v| v % z4.modulus()).collect();
            let x5: Vec<u64> = x.iter().map(|v| v % z5.modulus()).collect();
            let same_base = x.iter().zip(&b).all(|(a, c)| a % z3.modulus() == c % z3.modulus());
            let sh4 = shadow_of(l, &x4, z4);
            if same_base && sh4 == sh3 {
                fam.sp_lifts_of_base += 1;
                if shadow_of(l, &x5, z5) == sh4 {
                    fam.admitting += 1;
                }
            }
            red.push(x4);
        },
        |mut a, b| {
            a.0.attempted += b.0.attempted;
            a.0.converged += b.0.converged;
            a.0.sp_lifts_of_base += b.0.sp_lifts_of_base;
            a.0.admitting += b.0.admitting;
            a.1.extend(b.1);
            a
        },
    );
    fam.distinct = reductions.into_iter().collect::<HashSet<_>>().len() as u128;
    fam
}

/// Per-candidate outcome of the level-5 census.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeadEndCensus {
    pub candidates: u128,
    pub dead_ends: u128,
    pub admitting: u128,
}

/// Over every shadow-preserving lift `c` of `red_3(b)` to level 4, counts those with no
/// shadow-preserving lift to level 5, using the linear condition for both steps.
pub fn dead_end_census(p: u64) -> DeadEndCensus {
    let l = sl4();
    let z3 = Zpr::new(p, 3).expect("odd prime");
    let z4 = z3.with_level(4).unwrap();
    let b = element_b(p, 3).coords();
    let sys = SpLiftSystem::new(l, &b, z3);
    let pr = z3.modulus();
    par_fold_points(
        p,
        15,
        DeadEndCensus::default,
        |acc, z| {
            if !sys.accepts(z) {
                return;
            }
            let c: Vec<u64> = b.iter().zip(z).map(|(&a, &v)| (a + pr * v) % z4.modulus()).collect();
            acc.candidates += 1;
            if sp_lift_count(l, &c, z4) == 0 {
                acc.dead_ends += 1;
            } else {
                acc.admitting += 1;
            }
        },
        |a, b| DeadEndCensus {
            candidates: a.candidates + b.candidates,
            dead_ends: a.dead_ends + b.dead_ends,
            admitting: a.admitting + b.admitting,
        },
    )
}

/// The full report; the expensive parts are optional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremGReport {
    pub signature: CentralizerSignature,
    pub signature_ok: bool,
    pub shadow_dim_level2: usize,
    pub sp_lifts_predicted: u128,
    pub sp_lifts_scanned: Option<u128>,
    pub example_z_predicted: u128,
    pub example_z_scanned: Option<u128>,
    pub dead_ends: Option<DeadEndCensus>,
    pub newton: Option<NewtonFamily>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TheoremGOptions {
    /// Run the full `p^15` scans for `red_3(b)` and the example.
    pub full_scans: bool,
    /// Run the level-5 census over all candidates.
    pub dead_end_census: bool,
    /// Construct the Newton family (`None` skips it).
    pub newton_limit: Option<Option<u128>>,
}

pub fn theorem_g_experiment(p: u64, opts: TheoremGOptions) -> Result<TheoremGReport, ShadowError> {
    let l = sl4();
    let signature = centralizer_signature(&element_b(p, 6));
    let mut ad = signature.ad_exponents.clone();
    ad.sort();
    let signature_ok = signature.rank == 5
        && ad.iter().filter(|&&e| e == 0).count() == 8
        && ad.iter().filter(|&&e| e == 1).count() == 2
        && signature.derived_exponents == vec![0, 0, 1];
    let z3 = Zpr::new(p, 3).expect("odd prime");
    let b3 = element_b(p, 3).coords();
    let shadow_dim_level2 = lie_shadow(&element_b(p, 2)).dim();
    let sp_lifts_predicted = sp_lift_count(l, &b3, z3);
    let ez = example_z();
    let example_z_predicted = sp_lift_count(l, &ez.coords(), ez.ring());
    let (sp_lifts_scanned, example_z_scanned) = if opts.full_scans {
        (
            Some(shadow_preserving_lifts(l, &b3, z3, ScanMode::Full)?.sp_lift_count),
            Some(shadow_preserving_lifts(l, &ez.coords(), ez.ring(), ScanMode::Full)?.sp_lift_count),
        )
    } else {
        (None, None)
    };
    Ok(TheoremGReport {
        signature,
        signature_ok,
        shadow_dim_level2,
        sp_lifts_predicted,
        sp_lifts_scanned,
        example_z_predicted,
        example_z_scanned,
        dead_ends: opts.dead_end_census.then(|| dead_end_census(p)),
        newton: opts.newton_limit.map(|lim| newton_family(p, lim)),
    })
}

/// Outcome of the count law over many points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountLawReport {
    pub points: u128,
    /// Points with at least one shadow-preserving lift.
    pub with_lifts: u128,
    pub agree: u128,
    pub examples: Vec<Vec<u64>>,
}

impl CountLawReport {
    pub fn holds(&self) -> bool {
        self.with_lifts == self.agree
    }
}

/// Checks `#sp lifts = p^{d - dim [s, s]}` at every point with a shadow-preserving lift.
pub fn count_law(l: &LieLattice, points: impl IntoIterator<Item = Vec<u64>>, ring: Zpr) -> CountLawReport {
    let mut rep = CountLawReport::default();
    for x in points {
        rep.points += 1;
        let n = sp_lift_count(l, &x, ring);
        if n == 0 {
            continue;
        }
        rep.with_lifts += 1;
        if n == point_count(ring.p(), l.dim() - shadow_derived_dim(l, &x, ring)) {
            rep.agree += 1;
        } else if rep.examples.len() < 5 {
            rep.examples.push(x);
        }
    }
    rep
}

/// [`count_law`] over every point of `(Z/p^r)^d`, in parallel.
pub fn count_law_exhaustive(l: &LieLattice, p: u64, r: u32) -> Result<CountLawReport, ShadowError> {
    let ring = Zpr::new(p, r).map_err(|_| ShadowError::BadLevel)?;
    let n = point_count(ring.modulus(), l.dim());
    if n > MAX_LIFTS * 4 {
        return Err(ShadowError::TooLarge { lifts: n, limit: MAX_LIFTS * 4 });
    }
    Ok(par_fold_points(
        ring.modulus(),
        l.dim(),
        CountLawReport::default,
        |acc, x| {
            let one = count_law(l, [x.to_vec()], ring);
            acc.points += one.points;
            acc.with_lifts += one.with_lifts;
            acc.agree += one.agree;
            if acc.examples.len() < 5 {
                acc.examples.extend(one.examples);
            }
        },
        |mut a, b| {
            a.points += b.points;
            a.with_lifts += b.with_lifts;
            a.agree += b.agree;
            a.examples.extend(b.examples);
            a.examples.sort();
            a.examples.truncate(5);
            a
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_sl, centralizer_subspace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shadow_examples() {
        let z1 = Zpr::field(3).unwrap();
        let x = Sl4Element::new([0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0], z1).unwrap();
        assert_eq!(lie_shadow(&x).dim(), 7);
        assert_eq!(lie_shadow(&Sl4Element::zero(Zpr::new(3, 3).unwrap())).dim(), 15);
        assert_eq!(lie_shadow(&element_b(3, 2)).dim(), 5);
        assert_eq!(lie_shadow(&element_b(3, 1)).dim(), 7);
    }

    #[test]
    fn example_reduces_to_b() {
        let z = example_z();
        let b = element_b(3, 3);
        let z2 = z.reduce(2).unwrap();
        assert_eq!(z2, b.reduce(2).unwrap());
        assert_eq!(lie_shadow(&z).dim(), lie_shadow(&b).dim());
    }

    #[test]
    fn level_one_shadow_is_centralizer() {
        let f = Zpr::field(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let x: Vec<u64> = (0..15).map(|_| rng.gen_range(0..3)).collect();
            assert_eq!(shadow_of(sl4(), &x, f), centralizer_subspace(sl4(), &x, f));
        }
    }

    #[test]
    fn shadows_shrink_along_lifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..2000 {
            let r = rng.gen_range(1..=3);
            let ring = Zpr::new(3, r).unwrap();
            let up = ring.with_level(r + 1).unwrap();
            // Bias toward small shadows' complements: sparse elements have large centralizers.
            let x: Vec<u64> = (0..15).map(|_| if rng.gen_bool(0.7) { 0 } else { rng.gen_range(0..ring.modulus()) }).collect();
            let y: Vec<u64> = x.iter().map(|&v| v + ring.modulus() * rng.gen_range(0..3)).collect();
            assert!(shadow_of(sl4(), &y, up).is_subspace_of(&shadow_of(sl4(), &x, ring)));
        }
    }

    #[test]
    fn linear_condition_matches_scans() {
        for n in [2, 3] {
            let l = build_sl(n).unwrap();
            let d = l.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for r in 1..=2 {
                let ring = Zpr::new(3, r).unwrap();
                for _ in 0..12 {
                    let x: Vec<u64> =
                        (0..d).map(|_| if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..ring.modulus()) }).collect();
                    let full = shadow_preserving_lifts(&l, &x, ring, ScanMode::Full).unwrap().sp_lift_count;
                    let filtered = shadow_preserving_lifts(&l, &x, ring, ScanMode::Filtered).unwrap().sp_lift_count;
                    assert_eq!(full, sp_lift_count(&l, &x, ring), "{x:?}");
                    assert_eq!(full, filtered);
                }
            }
        }
    }

    #[test]
    fn count_law_sl2() {
        let l = build_sl(2).unwrap();
        for r in 1..=2 {
            let rep = count_law_exhaustive(&l, 3, r).unwrap();
            assert!(rep.holds(), "{rep:?}");
        }
    }

    #[test]
    fn b_signature_and_counts() {
        let sig = centralizer_signature(&element_b(3, 6));
        assert_eq!(sig.rank, 5);
        assert_eq!(sig.derived_exponents, vec![0, 0, 1]);
        assert_eq!(sp_lift_count(sl4(), &element_b(3, 3).coords(), Zpr::new(3, 3).unwrap()), 3u128.pow(13));
        assert_eq!(shadow_derived_dim(sl4(), &element_b(3, 3).coords(), Zpr::new(3, 3).unwrap()), 2);
        let z = example_z();
        assert_eq!(sp_lift_count(sl4(), &z.coords(), z.ring()), 0);
    }

    #[test]
    fn newton_family_prefix() {
        let fam = newton_family(3, Some(200));
        assert!(fam.certifies(200), "{fam:?}");
    }

    #[test]
    fn element_file_errors() {
        let z = Zpr::new(3, 2).unwrap();
        assert!(matches!(parse_element("1 2 3", z), Err(ShadowError::Parse(_))));
        assert!(matches!(parse_element("1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0", z), Err(ShadowError::Lattice(_))));
    }
}
