#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use madd::SimulationSpec;

/// `int_0^1 f_Gamma(k, rate)(s x) dx = P(k, rate s) / s` for integer `k`, with
/// the regularized lower incomplete gamma in closed form.
pub fn gamma_constant(spec: &SimulationSpec) -> f64 {
    gamma_mass(spec, 1.0) / spec.gamma_xscale
}

/// `P(k, rate * xscale * x)`.
fn gamma_mass(spec: &SimulationSpec, x: f64) -> f64 {
    let y = spec.gamma_rate * spec.gamma_xscale * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..spec.gamma_shape {
        term *= y / j as f64;
        sum += term;
    }
    1.0 - (-y).exp() * sum
}

pub fn normal_constant(spec: &SimulationSpec) -> f64 {
    normal_mass(spec, 1.0) / spec.normal_xscale
}

fn normal_mass(spec: &SimulationSpec, x: f64) -> f64 {
    let n = Normal::new(spec.normal_mean, spec.normal_sd).unwrap();
    n.cdf(spec.normal_xscale * x) - n.cdf(0.0)
}

/// Analytic CDF of the truncated group-0 density on `[0, 1]`.
pub fn cdf_g0(spec: &SimulationSpec, x: f64) -> f64 {
    gamma_mass(spec, x.clamp(0.0, 1.0)) / gamma_mass(spec, 1.0)
}

pub fn cdf_g1(spec: &SimulationSpec, x: f64) -> f64 {
    normal_mass(spec, x.clamp(0.0, 1.0)) / normal_mass(spec, 1.0)
}

pub fn ks(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Flat course table with the default column names. `bias` controls how
/// strongly gender shifts engagement and outcome; 0 makes gender independent
/// of everything else.
pub fn synthetic_course_csv(n: usize, bias: f64, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ages = ["0-35", "35-55", "55<="];
    let edu = [
        "No Formal quals",
        "Lower Than A Level",
        "A Level or Equivalent",
        "HE Qualification",
        "Post Graduate Qualification",
    ];
    let mut out = String::from(
        "id_student,gender,age_band,disability,highest_education,imd_band,num_of_prev_attempts,studied_credits,sum_click,final_result\n",
    );
    for i in 0..n {
        let female = rng.gen_bool(0.5);
        let g = if female { 1.0 } else { -1.0 };
        let age = rng.gen_range(0..3);
        let disability = rng.gen_bool(0.1);
        let e = rng.gen_range(0..5);
        let imd = rng.gen_range(0..10);
        let prev = if rng.gen_bool(0.15) { rng.gen_range(1..4) } else { 0 };
        let credits = [30, 60, 90, 120][rng.gen_range(0..4)];
        let engagement: f64 = rng.gen_range(-1.5..1.5) + bias * g;
        let clicks = (600.0 * (1.0 + 0.8 * engagement).max(0.05)).round();
        let z = 1.2 * engagement + 0.15 * (e as f64 - 2.0) + 0.05 * (imd as f64 - 4.5)
            - 0.4 * prev as f64
            - if disability { 0.3 } else { 0.0 }
            + rng.gen_range(-1.0..1.0);
        let pass = rng.gen_bool(1.0 / (1.0 + (-z).exp()));
        let imd_text = if imd == 1 { "10-20".to_string() } else { format!("{}-{}%", imd * 10, imd * 10 + 10) };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            100_000 + i,
            if female { "F" } else { "M" },
            ages[age],
            if disability { "Y" } else { "N" },
            edu[e],
            imd_text,
            prev,
            credits,
            clicks,
            if pass { "Pass" } else { "Fail" }
        ));
    }
    out
}
