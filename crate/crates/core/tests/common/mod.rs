//! Random case generation and independent numerical oracles shared by the
//! integration tests.

#![allow(dead_code)]

use gridstrength::netmodel::{
    Branch, Bus, BusKind, CaseFile, ConverterSpec, EmfMode, TheveninLink,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cigre_converter(bus: u32, p_dn_mw: f64) -> ConverterSpec {
    ConverterSpec {
        bus,
        p_dn_mw,
        base_mva: None,
        gamma_deg: Some(15.0),
        n_bridges: 2,
        k_ratio: 0.418,
        x_commutation_pu: 0.0515,
        r_dc_pu: 0.0099,
        b_c_pu: 0.52,
        omega_pu: None,
        control: None,
    }
}

/// Random connected inductive network with `n_conv` converter buses
/// (ids `1..=n_conv`) and `n_int` internal buses after them.
pub fn random_case(seed: u64, n_conv: usize, n_int: usize) -> CaseFile {
    let mut r = rng(seed);
    let n = n_conv + n_int;
    let buses = (1..=n as u32)
        .map(|id| Bus {
            id,
            kind: if (id as usize) <= n_conv { BusKind::Converter } else { BusKind::Internal },
        })
        .collect();

    // Random spanning tree, then a few extra edges.
    let mut branches = Vec::new();
    for k in 2..=n as u32 {
        let parent = r.random_range(1..k);
        branches.push(Branch { from: parent, to: k, x_pu: r.random_range(0.05..1.0) });
    }
    for _ in 0..r.random_range(0..=n) {
        let a = r.random_range(1..=n as u32);
        let b = r.random_range(1..=n as u32);
        if a != b {
            branches.push(Branch { from: a, to: b, x_pu: r.random_range(0.05..1.0) });
        }
    }

    let mut thevenin_links = vec![TheveninLink { bus: r.random_range(1..=n as u32), x_pu: r.random_range(0.1..1.5), emf_pu: 1.0 }];
    for bus in 1..=n as u32 {
        if bus != thevenin_links[0].bus && r.random_bool(0.4) {
            thevenin_links.push(TheveninLink { bus, x_pu: r.random_range(0.1..1.5), emf_pu: 1.0 });
        }
    }

    let converters = (1..=n_conv as u32)
        .map(|bus| cigre_converter(bus, r.random_range(100.0..2000.0)))
        .collect();

    let case = CaseFile {
        name: Some(format!("random-{seed}")),
        description: None,
        system_base_mva: 1000.0,
        frequency_hz: 50.0,
        ac_base_kv: None,
        emf_mode: EmfMode::Fixed,
        buses,
        branches,
        thevenin_links,
        converters,
    };
    case.validate().expect("generator builds valid cases");
    case
}

/// Dense nodal susceptance assembled directly from the case, in bus-id order.
pub fn dense_susceptance(case: &CaseFile) -> DMatrix<f64> {
    let n = case.buses.len();
    let idx = |id: u32| case.buses.iter().position(|b| b.id == id).unwrap();
    let mut b = DMatrix::zeros(n, n);
    for br in &case.branches {
        let (i, j, y) = (idx(br.from), idx(br.to), 1.0 / br.x_pu);
        b[(i, j)] += y;
        b[(j, i)] += y;
        b[(i, i)] -= y;
        b[(j, j)] -= y;
    }
    for l in &case.thevenin_links {
        let i = idx(l.bus);
        b[(i, i)] -= 1.0 / l.x_pu;
    }
    b
}

/// Solve `A·X = B` by Gaussian elimination with full pivoting.
pub fn full_pivot_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut a = a.clone();
    let mut b = b.clone();
    let mut col_perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, 0.0);
        for i in k..n {
            for j in k..n {
                if a[(i, j)].abs() > best {
                    best = a[(i, j)].abs();
                    pr = i;
                    pc = j;
                }
            }
        }
        assert!(best > 0.0, "singular block");
        a.swap_rows(k, pr);
        b.swap_rows(k, pr);
        a.swap_columns(k, pc);
        col_perm.swap(k, pc);
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..n {
                a[(i, j)] -= f * a[(k, j)];
            }
            for j in 0..b.ncols() {
                b[(i, j)] -= f * b[(k, j)];
            }
        }
    }
    let mut y = DMatrix::zeros(n, b.ncols());
    for c in 0..b.ncols() {
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[(i, j)] * y[(j, c)]).sum();
            y[(i, c)] = (b[(i, c)] - s) / a[(i, i)];
        }
    }
    let mut x = DMatrix::zeros(n, b.ncols());
    for (k, &orig) in col_perm.iter().enumerate() {
        x.set_row(orig, &y.row(k));
    }
    x
}

/// `B_kk − B_ke·B_ee⁻¹·B_ek` with the elimination done by [`full_pivot_solve`].
pub fn oracle_kron(b: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    let elim: Vec<usize> = (0..b.nrows()).filter(|i| !keep.contains(i)).collect();
    let sub = |r: &[usize], c: &[usize]| DMatrix::from_fn(r.len(), c.len(), |i, j| b[(r[i], c[j])]);
    let bkk = sub(keep, keep);
    if elim.is_empty() {
        return bkk;
    }
    let x = full_pivot_solve(&sub(&elim, &elim), &sub(&elim, keep));
    bkk - sub(keep, &elim) * x
}

/// Ratings in pu of the system base, converter-bus order.
pub fn ratings_pu(case: &CaseFile) -> DVector<f64> {
    DVector::from_iterator(
        case.converters.len(),
        case.converters.iter().map(|c| c.p_dn_mw / case.system_base_mva),
    )
}

/// Number of eigenvalues of the symmetric `s` below `x`, from the inertia of
/// `s − x·I` (signs of the `LDLᵀ` pivots, i.e. the signs of the ratios of
/// successive leading principal minors of the characteristic matrix).
pub fn count_below(s: &DMatrix<f64>, x: f64) -> usize {
    let n = s.nrows();
    let mut a = s.clone();
    for i in 0..n {
        a[(i, i)] -= x;
    }
    let mut neg = 0;
    for k in 0..n {
        let mut piv = a[(k, k)];
        if piv == 0.0 {
            piv = -f64::MIN_POSITIVE;
        }
        if piv < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let f = a[(i, k)] / piv;
            for j in k + 1..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    neg
}

/// Smallest eigenvalue of the symmetric `s` by bisection on eigenvalue counts.
pub fn bisect_min_eigenvalue(s: &DMatrix<f64>) -> f64 {
    let radius = (0..s.nrows())
        .map(|i| (0..s.ncols()).map(|j| s[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    while hi - lo > 1e-14 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if count_below(s, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// gSCR of a case computed only from the raw case data and the oracles above.
pub fn oracle_gscr(case: &CaseFile) -> f64 {
    let b = dense_susceptance(case);
    let keep: Vec<usize> = case
        .buses
        .iter()
        .enumerate()
        .filter(|(_, bus)| bus.kind == BusKind::Converter)
        .map(|(i, _)| i)
        .collect();
    let red = oracle_kron(&b, &keep);
    let p = ratings_pu(case);
    let s = DMatrix::from_fn(red.nrows(), red.ncols(), |i, j| -red[(i, j)] / (p[i] * p[j]).sqrt());
    bisect_min_eigenvalue(&s)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn max_rel_entry_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.amax().max(f64::MIN_POSITIVE);
    (a - b).amax() / scale
}
