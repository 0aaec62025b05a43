//! Reference implementations used only by the integration tests.
#![allow(dead_code)]

/// The four response surfaces, written out as printed polynomials.
pub const EQUATIONS: [&str; 4] = [
    "-333.77 + 614.73A - 27.435B + 630.36C - 18.97D - 168.98A^2 + 0.239B^2 - 76.08C^2 + 0.111D^2 \
     + 2.827AB + 0.575AC + 0.047AD - 0.7701BC + 0.1323BD - 0.1883CD",
    "2765.36 + 877.869A - 112.778B - 731.934C + 17.9222D - 357.829A^2 + 0.983456B^2 + 52.2310C^2 \
     - 0.0276946D^2 + 14.6571AB + 96.8495AC - 3.74068AD + 7.62554BC - 0.096084BD - 1.27093CD",
    "-354.406 + 211.418A + 17.3611B + 96.7916C + 2.78503D - 44.7516A^2 - 0.173996B^2 - 10.6696C^2 \
     - 0.026223D^2 - 2.08868AB + 6.05542AC + 0.197646AD + 2.07847BC - 0.078904BD + 1.18561CD",
    "318.163 + 726.696A + 33.3432B - 721.381C + 2.40622D - 210.057A^2 - 0.189623B^2 + 80.1788C^2 \
     + 0.000987D^2 - 1.89739AB + 49.8702AC - 0.32471AD - 1.70998BC - 0.07323BD + 0.306223CD",
];

/// One polynomial term: coefficient times a product of variable indices.
#[derive(Debug)]
pub struct Term {
    pub coefficient: f64,
    pub factors: Vec<usize>,
}

/// Parses `c0 + c1X + c2X^2 + c3XY ...` over variables A..D.
pub fn parse_polynomial(text: &str) -> Vec<Term> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut pieces = Vec::new();
    let mut current = String::new();
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            pieces.push(std::mem::take(&mut current));
        }
        current.push(ch);
    }
    pieces.push(current);
    pieces
        .into_iter()
        .map(|piece| {
            let split = piece.find(|c: char| c.is_ascii_uppercase()).unwrap_or(piece.len());
            let (number, vars) = piece.split_at(split);
            let coefficient: f64 = number.parse().unwrap_or_else(|_| panic!("bad term `{piece}`"));
            let mut factors = Vec::new();
            let mut chars = vars.chars().peekable();
            while let Some(v) = chars.next() {
                let index = (v as u8 - b'A') as usize;
                factors.push(index);
                if chars.peek() == Some(&'^') {
                    chars.next();
                    let power = chars.next().and_then(|p| p.to_digit(10)).expect("power");
                    for _ in 1..power {
                        factors.push(index);
                    }
                }
            }
            Term { coefficient, factors }
        })
        .collect()
}

pub fn evaluate_terms(terms: &[Term], x: &[f64; 4]) -> f64 {
    terms
        .iter()
        .map(|t| t.factors.iter().fold(t.coefficient, |acc, &i| acc * x[i]))
        .sum()
}

/// All four objectives at a physical point, straight from the printed text.
pub fn oracle_objectives(x: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (slot, eq) in out.iter_mut().zip(EQUATIONS) {
        *slot = evaluate_terms(&parse_polynomial(eq), x);
    }
    out
}

pub fn relative_error(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}

/// Dominated volume by inclusion-exclusion over every non-empty subset.
pub fn hvi_inclusion_exclusion(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let chosen: Vec<&Vec<f64>> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &points[i]).collect();
        let volume: f64 = (0..reference.len())
            .map(|k| chosen.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min) - reference[k])
            .product();
        if chosen.len() % 2 == 1 {
            total += volume;
        } else {
            total -= volume;
        }
    }
    total
}

/// Empirical Kolmogorov-Smirnov distance of `samples` from `cdf`.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Regularized lower incomplete gamma for integer shape: the Erlang CDF.
pub fn erlang_cdf(alpha: u32, beta: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let bx = beta * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..alpha {
        term *= bx / i as f64;
        sum += term;
    }
    1.0 - (-bx).exp() * sum
}
