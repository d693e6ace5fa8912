//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any gated criterion fails. Criterion 12 is report-only.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use fastslepian::dpss::DpssSolver;
use fastslepian::lowrank::{
    assemble_l, hilbert_factor, modulation_a, modulation_b, taylor_factor_a1, taylor_factor_b0, taylor_rank_a1,
    taylor_rank_b0, DeltaBudget,
};
use fastslepian::params::{
    k_prime_budget, low_rank_budget, tikhonov_rank_budget, transition_count_asymptotic, transition_count_bound,
};
use fastslepian::{FastFactorization, FastProjector, FastPseudoinverse, FastTikhonov, SlepianParams};
use fastslepian_cli::fourier_ext::{fourier_extension, FourierExtensionConfig, Method};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slepian_testkit as tk;

const N_GRID: [usize; 3] = [64, 256, 1024];
const W_GRID: [f64; 2] = [0.25, 1.0 / 16.0];
const EPS_GRID: [f64; 3] = [1e-3, 1e-6, 1e-9];
const ALPHAS: [f64; 2] = [1e-2, 1e-8];
const RANDOM_VECTORS: u64 = 20;

fn grid() -> impl Iterator<Item = (usize, f64, f64)> {
    N_GRID
        .into_iter()
        .flat_map(|n| W_GRID.into_iter().flat_map(move |w| EPS_GRID.into_iter().map(move |e| (n, w, e))))
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

/// Largest observed `value / limit` together with where it occurred.
#[derive(Default)]
struct Worst {
    ratio: f64,
    at: String,
}

impl Worst {
    fn track(&mut self, value: f64, limit: f64, at: impl FnOnce() -> String) {
        let r = value / limit;
        if !(r <= self.ratio) {
            self.ratio = r;
            self.at = at();
        }
    }

    fn ok(&self) -> bool {
        self.ratio <= 1.0
    }

    fn show(&self, what: &str) -> String {
        format!("worst {what} {:.3} at {}", self.ratio, self.at)
    }
}

/// Dense oracle bases, one per `(n, w)`.
#[derive(Default)]
struct Bases {
    cache: HashMap<(usize, u64), tk::Basis>,
}

impl Bases {
    fn get(&mut self, n: usize, w: f64) -> &tk::Basis {
        self.cache.entry((n, w.to_bits())).or_insert_with(|| tk::Basis::accurate(n, w))
    }
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn mul(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

fn c1_correction() -> Outcome {
    let start = Instant::now();
    let mut err = Worst::default();
    let mut rank = Worst::default();
    for n in N_GRID {
        for w in W_GRID {
            let m = tk::num_cols(n, w);
            let target = tk::to_complex(&(tk::prolate(n, w) - tk::partial_fourier_projector(n, m)));
            for eps in EPS_GRID {
                let params = SlepianParams::new(n, w, eps).unwrap();
                let l = assemble_l(&params).unwrap();
                let e = tk::norm2_bound_complex(&(&target - l.factor.to_dense()));
                err.track(e, eps, || format!("n={n} w={w} eps={eps:e}"));
                let r = l.factor.rank() as f64;
                rank.track(r, low_rank_budget(n, eps), || format!("n={n} w={w} eps={eps:e}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        err.ok() && rank.ok() && secs < 120.0,
        format!("{}; {}; {secs:.1} s (limit 120 s)", err.show("error/eps"), rank.show("r1/budget")),
    )
}

fn c2_transition_count() -> Outcome {
    let mut bound = Worst::default();
    let mut mismatches = Vec::new();
    for n in N_GRID {
        for w in W_GRID {
            let dense = tk::prolate_eigenvalues(n, w);
            let mut solver = DpssSolver::new(n, w).unwrap();
            for eps in EPS_GRID {
                let count = dense.iter().filter(|&&l| l > eps && l < 1.0 - eps).count();
                let lib = solver.window(eps, 1.0 - eps).unwrap().len();
                if lib != count {
                    mismatches.push(format!("n={n} w={w} eps={eps:e}: {lib} vs {count}"));
                }
                bound.track(count as f64, transition_count_bound(n, eps), || {
                    format!("n={n} w={w} eps={eps:e}")
                });
            }
        }
    }
    // Dense counts are used up to n = 1024; larger n use the tridiagonal
    // window count, which agrees with the dense count on the grid above.
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for p in 8..=12 {
        let n = 1usize << p;
        let dense = (n <= 1024).then(|| tk::prolate_eigenvalues(n, 0.25));
        let mut solver = DpssSolver::new(n, 0.25).unwrap();
        for eps in [1e-3, 1e-6] {
            let count = match &dense {
                Some(d) => d.iter().filter(|&&l| l > eps && l < 1.0 - eps).count(),
                None => solver.window(eps, 1.0 - eps).unwrap().len(),
            };
            let ratio = count as f64 / transition_count_asymptotic(n, eps);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    let law = lo >= 0.5 && hi <= 2.0;
    Outcome::new(
        bound.ok() && law && mismatches.is_empty(),
        format!(
            "{}; count/asymptote in [{lo:.3}, {hi:.3}] (need [0.5, 2]); solver/dense mismatches: {}",
            bound.show("count/bound"),
            if mismatches.is_empty() { "none".to_string() } else { mismatches.join(", ") }
        ),
    )
}

fn c3_projector(bases: &mut Bases) -> Outcome {
    let mut dense = Worst::default();
    let mut vecs = Worst::default();
    for (n, w, eps) in grid() {
        let params = SlepianParams::new(n, w, eps).unwrap();
        let p = FastProjector::new(&params).unwrap();
        let exact = bases.get(n, w).projection(params.k);
        let e = tk::norm2_bound(&(p.to_dense() - &exact));
        dense.track(e, eps, || format!("n={n} w={w} eps={eps:e}"));
        for seed in 0..RANDOM_VECTORS {
            let x = random_vector(n, seed);
            let got = p.project(&x).unwrap();
            let want = mul(&exact, &x);
            let d: Vec<f64> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
            vecs.track(norm(&d), eps * norm(&x), || format!("n={n} w={w} eps={eps:e} seed={seed}"));
        }
    }
    Outcome::new(
        dense.ok() && vecs.ok(),
        format!("{}; {}", dense.show("dense error/eps"), vecs.show("vector error/(eps |x|)")),
    )
}

fn c4_factorization(bases: &mut Bases) -> Outcome {
    let mut trip = Worst::default();
    let mut kp = Worst::default();
    for (n, w, eps) in grid() {
        let params = SlepianParams::new(n, w, eps).unwrap();
        let f = FastFactorization::new(&params).unwrap();
        kp.track(f.k_prime() as f64, k_prime_budget(n, w, eps), || format!("n={n} w={w} eps={eps:e}"));
        let exact = bases.get(n, w).projection(params.k);
        for seed in 0..RANDOM_VECTORS {
            let x = random_vector(n, seed);
            let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let got = f.round_trip(&xc).unwrap();
            let want = mul(&exact, &x);
            let d = got
                .iter()
                .zip(&want)
                .map(|(a, &b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            trip.track(d, 2.0 * eps * norm(&x), || format!("n={n} w={w} eps={eps:e} seed={seed}"));
        }
    }
    Outcome::new(
        trip.ok() && kp.ok(),
        format!("{}; {}", trip.show("round-trip error/(2 eps |x|)"), kp.show("k'/budget")),
    )
}

fn c5_pseudoinverse(bases: &mut Bases) -> Outcome {
    let mut err = Worst::default();
    for (n, w, eps) in grid() {
        let params = SlepianParams::new(n, w, eps).unwrap();
        let p = FastPseudoinverse::new(&params).unwrap();
        let e = tk::norm2_bound(&(p.to_dense() - bases.get(n, w).pinv(params.k)));
        err.track(e, 3.0 * eps, || format!("n={n} w={w} eps={eps:e}"));
    }
    Outcome::new(err.ok(), err.show("error/(3 eps)"))
}

fn c6_tikhonov(bases: &mut Bases) -> Outcome {
    let mut err = Worst::default();
    let mut rank = Worst::default();
    for (n, w, eps) in grid() {
        let params = SlepianParams::new(n, w, eps).unwrap();
        for alpha in ALPHAS {
            let t = FastTikhonov::new(&params, alpha).unwrap();
            let e = tk::norm2_bound(&(t.to_dense() - bases.get(n, w).tikhonov(alpha)));
            let at = || format!("n={n} w={w} eps={eps:e} alpha={alpha:e}");
            err.track(e, eps, at);
            rank.track(t.rank() as f64, tikhonov_rank_budget(n, eps, alpha), at);
        }
    }
    Outcome::new(
        err.ok() && rank.ok(),
        format!("{}; {}", err.show("error/eps"), rank.show("r4/budget")),
    )
}

fn c7_hilbert() -> Outcome {
    let mut err = Worst::default();
    let mut hnorm = Worst::default();
    for n in N_GRID {
        let h = tk::hilbert(n);
        hnorm.track(tk::norm2_bound(&h), PI, || format!("n={n}"));
        for eps in [1e-3, 1e-9] {
            let delta_h = DeltaBudget::for_tolerance(eps).hilbert;
            let z = hilbert_factor(n, delta_h).unwrap();
            let e = tk::norm2_bound(&(&h - &z * z.transpose()));
            err.track(e, delta_h, || format!("n={n} eps={eps:e}"));
        }
    }
    Outcome::new(
        err.ok() && hnorm.ok(),
        format!("{}; {}", err.show("error/delta_H"), hnorm.show("|H|/pi")),
    )
}

fn c8_taylor() -> Outcome {
    let mut a = Worst::default();
    let mut b = Worst::default();
    for n in [16, 64, 256] {
        let a1 = tk::a1_exact(n);
        for eps in EPS_GRID {
            let budget = DeltaBudget::for_tolerance(eps);
            let t = taylor_factor_a1(n, budget.a1).unwrap();
            let r = taylor_rank_a1(budget.a1);
            let bound = 2.0 / (3.0 * PI) * 4f64.powi(-(r as i32));
            a.track((&a1 - t.to_dense()).norm(), bound, || format!("n={n} eps={eps:e}"));
            for w in W_GRID.into_iter().chain([0.3]) {
                let wp = tk::num_cols(n, w) as f64 / (2.0 * n as f64);
                let t = taylor_factor_b0(n, w, wp, budget.b0).unwrap();
                let r = taylor_rank_b0(budget.b0);
                let bound = 1.5 * (PI / 6.0).powi(2 * r as i32);
                let e = (tk::b0_exact(n, w, wp) - t.to_dense()).norm();
                b.track(e, bound, || format!("n={n} w={w} eps={eps:e}"));
            }
        }
    }
    Outcome::new(
        a.ok() && b.ok(),
        format!("{}; {}", a.show("A1 error/bound"), b.show("B0 error/bound")),
    )
}

fn c9_splitting() -> Outcome {
    let mut worst = 0.0f64;
    let mut at = String::new();
    for (n, w) in [(16, 0.25), (32, 0.25), (64, 0.25), (64, 1.0 / 16.0), (48, 0.37), (40, 0.1)] {
        let m = tk::num_cols(n, w);
        let wp = m as f64 / (2.0 * n as f64);
        let diag = |v: Vec<Complex64>| DMatrix::from_diagonal(&DVector::from_vec(v));
        let da = diag(modulation_a(n, m));
        let db = diag(modulation_b(n, w, wp));
        let a0 = tk::to_complex(&tk::a0_exact(n));
        let b0 = tk::to_complex(&tk::b0_exact(n, w, wp));
        let lhs = (&da * &a0 * da.adjoint() - da.adjoint() * &a0 * &da) * Complex64::new(0.0, -0.5)
            + (&db * &b0 * db.adjoint() + db.adjoint() * &b0 * &db) * Complex64::new(0.5, 0.0);
        let rhs = tk::to_complex(&(tk::prolate(n, w) - tk::partial_fourier_projector(n, m)));
        let r = (lhs - rhs).camax();
        if r > worst {
            worst = r;
            at = format!("n={n} w={w}");
        }
    }
    Outcome::new(worst <= 1e-10, format!("max entry residual {worst:.2e} at {at} (limit 1e-10)"))
}

fn c10_dpss() -> Outcome {
    let (mut ortho, mut sym, mut lam) = (0.0f64, 0.0f64, 0.0f64);
    for n in N_GRID {
        for w in W_GRID {
            let k = (2.0 * n as f64 * w).round() as usize;
            let idx: Vec<usize> = if n <= 256 {
                (0..n).collect()
            } else {
                (k.saturating_sub(40)..(k + 40).min(n)).collect()
            };
            let mut solver = DpssSolver::new(n, w).unwrap();
            let pairs: Vec<_> = idx.iter().map(|&i| solver.eigenpair(i).unwrap().clone()).collect();
            let v = DMatrix::from_fn(n, pairs.len(), |r, c| pairs[c].vector[r]);
            let gram = v.transpose() * &v - DMatrix::identity(pairs.len(), pairs.len());
            ortho = ortho.max(gram.amax());
            let dense = tk::prolate_eigenvalues(n, w);
            for p in &pairs {
                lam = lam.max((p.lambda - dense[p.index]).abs());
            }
            if w == 0.25 {
                let by_index: HashMap<usize, f64> = pairs.iter().map(|p| (p.index, p.lambda)).collect();
                for (&i, &l) in &by_index {
                    if let Some(&mirror) = by_index.get(&(n - 1 - i)) {
                        sym = sym.max((l + mirror - 1.0).abs());
                    }
                }
            }
        }
    }
    Outcome::new(
        ortho <= 1e-10 && sym <= 1e-8 && lam <= 1e-10,
        format!(
            "orthonormality {ortho:.2e} (limit 1e-10); symmetry {sym:.2e} (limit 1e-8); lambda vs dense {lam:.2e} (limit 1e-10)"
        ),
    )
}

fn c11_fourier_extension() -> Outcome {
    let start = Instant::now();
    let cfg = FourierExtensionConfig::default();
    let rows = fourier_extension(&cfg, 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let get = |m: usize, method: Method| {
        rows.iter()
            .find(|r| r.m == m && r.method == method)
            .map(|r| r.rel_rms)
            .unwrap()
    };
    let mut parity = 0.0f64;
    for &m in &cfg.m_values {
        let exact = get(m, Method::ExtExactPinv);
        parity = parity.max((get(m, Method::ExtFastPinv) - exact).abs() / exact);
    }
    let m_max = *cfg.m_values.iter().max().unwrap();
    let fourier = get(m_max, Method::Fourier);
    let ratio_fast = fourier / get(m_max, Method::ExtFastPinv);
    let ratio_exact = fourier / get(m_max, Method::ExtExactPinv);
    Outcome::new(
        parity <= 0.1 && ratio_fast.min(ratio_exact) >= 5.0 && secs < 300.0,
        format!(
            "fast/exact pinv relative gap {parity:.2e} (limit 0.1); fourier/extension at M={m_max}: \
             fast {ratio_fast:.2}, exact {ratio_exact:.2} (need 5); {secs:.1} s (limit 300 s)"
        ),
    )
}

fn median_seconds(trials: usize, mut f: impl FnMut()) -> f64 {
    let mut times: Vec<f64> = (0..trials)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[trials / 2]
}

fn c12_performance() -> Outcome {
    const TRIALS: usize = 11;
    let fast_apply = |n: usize| {
        let p = FastProjector::new(&SlepianParams::new(n, 0.25, 1e-6).unwrap()).unwrap();
        let x = random_vector(n, 0);
        let secs = median_seconds(TRIALS, || {
            std::hint::black_box(p.project(&x).unwrap());
        });
        (p, x, secs)
    };
    let (p, x, fast_8k) = fast_apply(1 << 13);
    let dense = p.to_dense();
    let xv = DVector::from_column_slice(&x);
    let dense_8k = median_seconds(TRIALS, || {
        std::hint::black_box(&dense * &xv);
    });
    drop(dense);
    let beats = fast_8k < dense_8k;
    let t: Vec<f64> = [14, 16, 18].iter().map(|&e| fast_apply(1 << e).2).collect();
    let (r14, r16) = (t[1] / t[0], t[2] / t[1]);
    Outcome::new(
        beats && r14 <= 6.0 && r16 <= 6.0,
        format!(
            "n=2^13 fast {fast_8k:.2e} s vs dense {dense_8k:.2e} s; median apply {:.2e}, {:.2e}, {:.2e} s at \
             2^14, 2^16, 2^18; time(4n)/time(n) = {r14:.2} at 2^14, {r16:.2} at 2^16 (limit 6)",
            t[0], t[1], t[2]
        ),
    )
}

fn main() -> ExitCode {
    let mut bases = Bases::default();
    let mut failed = Vec::new();
    let mut clock = Instant::now();
    let mut report = |id: u32, name: &str, gated: bool, outcome: Outcome| {
        let status = match (outcome.pass, gated) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (report-only)",
        };
        let secs = clock.elapsed().as_secs_f64();
        clock = Instant::now();
        println!("criterion {id:>2} [{status}] {name}: {} [{secs:.1} s]", outcome.detail);
        if gated && !outcome.pass {
            failed.push(id);
        }
    };
    report(1, "B - F F^* correction", true, c1_correction());
    report(2, "transition count", true, c2_transition_count());
    report(3, "fast projector", true, c3_projector(&mut bases));
    report(4, "fast factorization", true, c4_factorization(&mut bases));
    report(5, "fast pseudoinverse", true, c5_pseudoinverse(&mut bases));
    report(6, "fast Tikhonov", true, c6_tikhonov(&mut bases));
    report(7, "Hilbert factor", true, c7_hilbert());
    report(8, "Taylor factors", true, c8_taylor());
    report(9, "modulated splitting", true, c9_splitting());
    report(10, "Slepian eigenpairs", true, c10_dpss());
    report(11, "Fourier extension", true, c11_fourier_extension());
    report(12, "performance scaling", false, c12_performance());
    if failed.is_empty() {
        println!("acceptance: all gated criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
