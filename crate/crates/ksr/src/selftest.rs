//! Randomized checks bundled into the binary.

use ksr_core::attention::{
    additive_attention, dot_attention, multi_head_attention, scaled_dot_backward, AdditiveParams, AttentionInput,
    AttentionResult, Matrix, MultiHeadParams,
};
use ksr_core::augment::mask_rng;
use ksr_core::dsp::fft_real;
use ksr_core::metrics::levenshtein;
use rand_core::RngCore;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: usize,
    pub total: usize,
    pub first_failure: Option<String>,
}

struct Draw<R>(R);

impl<R: RngCore> Draw<R> {
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn below(&mut self, n: usize) -> usize {
        ksr_core::augment::uniform_inclusive(&mut self.0, 0, n - 1)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| self.range(-2.0, 2.0))
    }
}

fn suite(name: &'static str, cases: usize, mut check: impl FnMut(usize) -> Result<(), String>) -> SuiteReport {
    let mut passed = 0;
    let mut first_failure = None;
    for i in 0..cases {
        match check(i) {
            Ok(()) => passed += 1,
            Err(e) => {
                first_failure.get_or_insert(format!("case {i}: {e}"));
            }
        }
    }
    SuiteReport {
        suite: name,
        passed,
        total: cases,
        first_failure,
    }
}

fn check_weights_and_hull(inp: &AttentionInput, r: &AttentionResult) -> Result<(), String> {
    for w in &r.weights {
        for i in 0..w.rows() {
            let row = w.row(i);
            if row.iter().any(|&x| x < 0.0) {
                return Err("negative weight".into());
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(format!("weight row sums to {s}"));
            }
        }
    }
    if r.weights.len() == 1 {
        let w = &r.weights[0];
        for i in 0..r.context.rows() {
            for c in 0..r.context.cols() {
                let direct: f64 = (0..w.cols()).map(|j| w.get(i, j) * inp.v.get(j, c)).sum();
                if (direct - r.context.get(i, c)).abs() > 1e-9 {
                    return Err("context is not the weighted sum of values".into());
                }
            }
        }
    }
    Ok(())
}

fn attention_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut d = Draw(mask_rng(seed));
    suite("attention", cases, |_| {
        let (n_q, n_k, dk, dv) = (1 + d.below(4), 1 + d.below(6), 1 + d.below(5), 1 + d.below(4));
        let inp = AttentionInput::new(d.matrix(n_q, dk), d.matrix(n_k, dk), d.matrix(n_k, dv)).map_err(|e| e.to_string())?;
        let dot = dot_attention(&inp, true).map_err(|e| e.to_string())?;
        check_weights_and_hull(&inp, &dot)?;

        let hidden = 1 + d.below(4);
        let add = AdditiveParams {
            w1: d.matrix(hidden, 2 * dk),
            w2: (0..hidden).map(|_| d.range(-2.0, 2.0)).collect(),
        };
        check_weights_and_hull(&inp, &additive_attention(&inp, &add).map_err(|e| e.to_string())?)?;

        let same = AttentionInput::new(inp.q.clone(), inp.k.clone(), d.matrix(n_k, dk)).map_err(|e| e.to_string())?;
        let mh = multi_head_attention(&same, &MultiHeadParams::identity(dk, 1).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let sd = dot_attention(&same, true).map_err(|e| e.to_string())?;
        if mh.context != sd.context {
            return Err("one identity head differs from scaled dot".into());
        }

        let g = d.matrix(n_q, dv);
        let grads = scaled_dot_backward(&inp, &g).map_err(|e| e.to_string())?;
        let loss = |q: &Matrix| -> f64 {
            let x = AttentionInput::new(q.clone(), inp.k.clone(), inp.v.clone()).unwrap();
            let c = dot_attention(&x, true).unwrap().context;
            c.data().iter().zip(g.data()).map(|(a, b)| a * b).sum()
        };
        let h = 1e-5;
        for idx in 0..inp.q.data().len() {
            let mut plus = inp.q.clone();
            plus.data_mut()[idx] += h;
            let mut minus = inp.q.clone();
            minus.data_mut()[idx] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let an = grads.dq.data()[idx];
            if (fd - an).abs() > 1e-4 * an.abs().max(1e-2) {
                return Err(format!("dQ[{idx}] analytic {an} vs numeric {fd}"));
            }
        }
        Ok(())
    })
}

fn fft_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut d = Draw(mask_rng(seed ^ 0x5f5f));
    suite("fft", cases, |_| {
        let n = 1usize << (3 + d.below(8));
        let x: Vec<f64> = (0..n).map(|_| d.range(-1.0, 1.0)).collect();
        let spec = fft_real(&x, n).map_err(|e| e.to_string())?;
        let full = spec.full_spectrum();
        for (k, got) in full.iter().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            if (got.re - re).abs() > 1e-6 || (got.im - im).abs() > 1e-6 {
                return Err(format!("n={n} bin {k} differs from the direct sum"));
            }
        }
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = full.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
        if (time - freq).abs() > 1e-6 * time.max(1e-12) {
            return Err(format!("n={n} energy {time} vs {freq}"));
        }
        Ok(())
    })
}

fn cer_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut d = Draw(mask_rng(seed ^ 0xc3c3));
    let mut word = move || -> Vec<u8> { (0..d.below(9)).map(|_| b'a' + d.below(3) as u8).collect() };
    suite("cer", cases, |_| {
        let (a, b, c) = (word(), word(), word());
        let ab = levenshtein(&a, &b);
        if ab != levenshtein(&b, &a) {
            return Err("distance is not symmetric".into());
        }
        if (ab == 0) != (a == b) {
            return Err("zero distance must mean equal strings".into());
        }
        if levenshtein(&a, &c) > ab + levenshtein(&b, &c) {
            return Err("triangle inequality violated".into());
        }
        if ab < a.len().abs_diff(b.len()) || ab > a.len().max(b.len()) {
            return Err("distance outside its length bounds".into());
        }
        Ok(())
    })
}

pub fn run_all(seed: u64, cases: usize) -> Vec<SuiteReport> {
    vec![attention_suite(seed, cases), fft_suite(seed, cases), cer_suite(seed, cases)]
}
