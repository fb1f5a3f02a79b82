use clap::ValueEnum;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use oscone::boxes::{chsh_functional, classify, seesaw_maximize, strategy_to_box, ClassifyOptions};
use oscone::convex::{solve_feasibility, SolveStatus, DEFAULT_MAX_ITER, DEFAULT_TOL};
use oscone::numerics::sample::random_general;
use oscone::numerics::{format_sig, numerical_radius, GeneralMatrix, HermMatrix};
use oscone::opsys::{ando_split, gamma_quotient, nc2_positivity, LInfVec, NC2Coeff, GAMMA_KERNEL};
use oscone::tensorlab::{
    max_cone_construct, parabola_max, roots_of_unity, sone_obstruction, sone_relaxation, sqrt_bell_value,
    torus_min_eig, BoxMatrix, FactorWitness, MatTrigPoly,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Case {
    Sone,
    Qmatrix,
    Prbox,
    Chsh,
    Ando,
    Nc2,
    Gamma,
}

#[derive(Clone, Debug)]
pub struct Params {
    pub seed: u64,
    /// Torus grid for `sone`.
    pub grid: usize,
    /// Random instances for `ando` and `nc2`; `None` uses 200 and 1000.
    pub trials: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, expected: impl Into<String>, actual: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), expected: expected.into(), actual: actual.into(), pass }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "name": self.name, "expected": self.expected, "actual": self.actual, "pass": self.pass })
    }
}

fn s(x: f64) -> String {
    format_sig(x, 12)
}

fn frac(r: Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn run(case: Case, p: &Params) -> Vec<Check> {
    match case {
        Case::Sone => sone(p),
        Case::Qmatrix => qmatrix(),
        Case::Prbox => prbox(),
        Case::Chsh => chsh(p),
        Case::Ando => ando(p),
        Case::Nc2 => nc2(p),
        Case::Gamma => gamma(),
    }
}

fn sone(p: &Params) -> Vec<Check> {
    let mut out = Vec::new();
    let bound = 3.0 - 2.0 * 2f64.sqrt();
    match torus_min_eig(&MatTrigPoly::h(), p.grid) {
        Ok(m) => out.push(Check::new(
            "torus min eigenvalue of h",
            format!("in [{}, {}]", s(bound - 1e-9), s(bound + 1e-4)),
            s(m.value),
            m.value >= bound - 1e-9 && m.value <= bound + 1e-4,
        )),
        Err(e) => out.push(Check::new("torus min eigenvalue of h", s(bound), e.to_string(), false)),
    }
    let r = |n: i64| Ratio::from_integer(n);
    let vertex = parabola_max(r(-1), r(7), r(-13));
    let want = Some((Ratio::new(7, 2), Ratio::new(-3, 4)));
    out.push(Check::new(
        "max of -x^2 + 7x - 13",
        "-3/4 at x = 7/2",
        vertex.map_or("none".into(), |(x, m)| format!("{} at x = {}", frac(m), frac(x))),
        vertex == want,
    ));
    let obs = sone_obstruction(100, 1e-3);
    out.push(Check::new("PSD hits on the 100^2 grid", "0", obs.psd_hits.to_string(), obs.psd_hits == 0));
    out.push(Check::new("obstruction certified", "true", obs.certified.to_string(), obs.certified));
    let relax = sone_relaxation(&roots_of_unity(5), 0.0).map(|pb| solve_feasibility(&pb, DEFAULT_TOL, DEFAULT_MAX_ITER));
    match relax {
        Ok(rep) => out.push(Check::new(
            "relaxation on the 5th roots of unity",
            "infeasible-evidence, gap > 1e-4",
            format!("{}, gap {}", status_name(rep.status), s(rep.gap_estimate)),
            rep.status == SolveStatus::InfeasibleEvidence && rep.gap_estimate > 1e-4,
        )),
        Err(e) => out.push(Check::new("relaxation on the 5th roots of unity", "infeasible-evidence", e.to_string(), false)),
    }
    out
}

fn qmatrix() -> Vec<Check> {
    let e11 = HermMatrix::diag(&[1.0, 0.0]);
    let e22 = HermMatrix::diag(&[0.0, 1.0]);
    let side = [e11.clone(), e22.clone(), e11, e22];
    let built = FactorWitness::new(side.clone(), side).and_then(|w| max_cone_construct(&w));
    let Ok(q) = built else {
        return vec![Check::new("construct Q", "a box matrix", format!("{built:?}"), false)];
    };
    let want = BoxMatrix::perfect_correlation();
    let mut out = vec![Check::new(
        "Q from X = Y = (E11, E22, E11, E22)",
        format!("{:?}", want.entries()),
        format!("{:?}", q.entries()),
        q.entries() == want.entries(),
    )];
    match sqrt_bell_value(&q) {
        Ok(v) => {
            out.push(Check::new("lhs(0)", "2", s(v.lhs[0]), v.lhs[0] == 2.0));
            out.push(Check::new("rhs", "2", s(v.rhs), v.rhs == 2.0));
            out.push(Check::new("violated", "false", v.any_violated().to_string(), !v.any_violated()));
        }
        Err(e) => out.push(Check::new("sqrt-Bell value", "lhs 2 rhs 2", e.to_string(), false)),
    }
    out
}

fn prbox() -> Vec<Check> {
    let v = match sqrt_bell_value(&BoxMatrix::pr()) {
        Ok(v) => v,
        Err(e) => return vec![Check::new("sqrt-Bell value of PR", "lhs 2 rhs 0", e.to_string(), false)],
    };
    let t = &v.table;
    let zeros = [
        ("b=0 (j,k)=(2,1)", t.term(0, 2, 0, 2, 1)),
        ("b=0 (j,k)=(1,2)", t.term(0, 2, 0, 1, 2)),
        ("b=2 (j,k)=(1,1)", t.term(0, 2, 2, 1, 1)),
        ("b=2 (j,k)=(2,2)", t.term(0, 2, 2, 2, 2)),
    ];
    let mut out = vec![
        Check::new("lhs(0)", "2", s(v.lhs[0]), v.lhs[0] == 2.0),
        Check::new("rhs", "0", s(v.rhs), v.rhs == 0.0),
        Check::new("argmin (a, c)", "(0, 2)", format!("{:?}", v.argmin), v.argmin == (0, 2)),
    ];
    for (name, value) in zeros {
        out.push(Check::new(&format!("S-term a=0 c=2 {name}"), "0", s(value), value == 0.0));
    }
    out.push(Check::new("violated", "true", v.violated(0).to_string(), v.violated(0)));
    out
}

fn chsh(p: &Params) -> Vec<Check> {
    let target = 2.0 * 2f64.sqrt();
    let res = match seesaw_maximize(&chsh_functional(), 2, 20, p.seed) {
        Ok(r) => r,
        Err(e) => return vec![Check::new("seesaw", s(target), e.to_string(), false)],
    };
    let mut out = vec![Check::new(
        "seesaw CHSH value (dim 2, 20 restarts)",
        format!("in [{}, {}]", s(target - 1e-3), s(target + 1e-9)),
        s(res.value),
        res.value >= target - 1e-3 && res.value <= target + 1e-9,
    )];
    match strategy_to_box(&res.strategy) {
        Ok(b) => {
            let r = classify(&b, &ClassifyOptions { seed: p.seed, ..Default::default() });
            out.push(Check::new("box invariants", "pass", "pass", true));
            out.push(Check::new("non-signaling", "true", r.nonsignaling.to_string(), r.nonsignaling));
            let local = r.is_local();
            out.push(Check::new("local", "false", format!("{local:?}"), local == Some(false)));
        }
        Err(e) => out.push(Check::new("box invariants", "pass", e.to_string(), false)),
    }
    out
}

/// A random `n×n` matrix with numerical radius drawn from `[0.05, 0.95]`
/// outside `0.5 ± 1e-4`.
pub fn ando_instance(rng: &mut ChaCha8Rng) -> (GeneralMatrix, f64) {
    let n = rng.gen_range(1..=5);
    let t = random_general(rng, n, n);
    let w0 = numerical_radius(&t).expect("square input");
    let w = loop {
        let w: f64 = rng.gen_range(0.05..0.95);
        if (w - 0.5).abs() > 1e-4 {
            break w;
        }
    };
    let t = t.scale_real(w / w0);
    let w = numerical_radius(&t).expect("square input");
    (t, w)
}

fn ando(p: &Params) -> Vec<Check> {
    let trials = p.trials.unwrap_or(200);
    let e12 = GeneralMatrix::unit(2, 0, 1);
    let w12 = numerical_radius(&e12).unwrap_or(f64::NAN);
    let mut out = vec![Check::new("w(E12)", "0.5 within 1e-10", s(w12), (w12 - 0.5).abs() <= 1e-10)];
    let e12_status = ando_split(&e12).map(|r| r.status);
    out.push(Check::new(
        "Ando split of E12",
        "feasible",
        e12_status.as_ref().map_or_else(|e| e.to_string(), |st| status_name(*st).to_string()),
        e12_status == Ok(SolveStatus::Feasible),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let instances: Vec<_> = (0..trials).map(|_| ando_instance(&mut rng)).collect();
    let mut agree = 0;
    let mut first_miss = None;
    for (k, (t, w)) in instances.iter().enumerate() {
        let status = ando_split(t).map(|r| r.status);
        let want = if *w <= 0.5 { SolveStatus::Feasible } else { SolveStatus::InfeasibleEvidence };
        if status == Ok(want) {
            agree += 1;
        } else if first_miss.is_none() {
            first_miss = Some(format!(" (first miss: case {k}, w = {}, got {status:?})", s(*w)));
        }
    }
    out.push(Check::new(
        "Ando verdict matches w(T) <= 1/2",
        format!("{trials}/{trials}"),
        format!("{agree}/{trials}{}", first_miss.unwrap_or_default()),
        agree == trials,
    ));
    out
}

/// A scalar triple `(c0, c1, c2)` with `c0 - |c1| - |c2|` outside `±1e-4`.
pub fn nc2_instance(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let c: [f64; 3] = [rng.gen_range(0.0..3.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if (c[0] - c[1].abs() - c[2].abs()).abs() > 1e-4 {
            return c;
        }
    }
}

fn nc2(p: &Params) -> Vec<Check> {
    let trials = p.trials.unwrap_or(1000);
    let mut out = Vec::new();
    for (c, want) in [([3.0, 1.0, 1.0], true), ([2.0, 1.0, 1.0], false), ([1.0, 0.0, 0.0], true)] {
        let st = nc2_positivity(&NC2Coeff::scalar(c[0], c[1], c[2]), 1e-6).status;
        let expected = if want { SolveStatus::Feasible } else { SolveStatus::InfeasibleEvidence };
        out.push(Check::new(&format!("positivity of {c:?} with delta 1e-6"), status_name(expected), status_name(st), st == expected));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut agree = 0;
    for _ in 0..trials {
        let [c0, c1, c2] = nc2_instance(&mut rng);
        let feasible = nc2_positivity(&NC2Coeff::scalar(c0, c1, c2), 1e-7).status == SolveStatus::Feasible;
        if feasible == (c0 > c1.abs() + c2.abs()) {
            agree += 1;
        }
    }
    out.push(Check::new(
        "scalar criterion c0 > |c1| + |c2|",
        format!("{trials}/{trials}"),
        format!("{agree}/{trials}"),
        agree == trials,
    ));
    out
}

fn gamma() -> Vec<Check> {
    let cases: [([f64; 4], [f64; 3]); 3] = [
        (GAMMA_KERNEL, [0.0, 0.0, 0.0]),
        ([1.0, 1.0, 1.0, 1.0], [1.0, 0.0, 0.0]),
        ([1.0, 0.0, 0.0, 0.0], [0.25, 0.25, 0.0]),
    ];
    cases
        .into_iter()
        .map(|(x, want)| {
            let got = gamma_quotient(&LInfVec::new(x.to_vec())).ok().and_then(|c| c.as_scalar());
            Check::new(
                &format!("gamma{x:?}"),
                format!("{want:?}"),
                got.map_or("error".into(), |g| format!("{g:?}")),
                got == Some(want),
            )
        })
        .collect()
}

pub fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Feasible => "feasible",
        SolveStatus::InfeasibleEvidence => "infeasible-evidence",
        SolveStatus::Undecided => "undecided",
    }
}
