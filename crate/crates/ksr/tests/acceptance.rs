//! Acceptance criteria, one PASS/FAIL line each. Every check compares the
//! library against an oracle written here, not against library helpers.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ksr::{ksfm, wav};
use ksr_core::attention::{
    additive_attention, dot_attention, location_aware_attention, multi_head_attention, scaled_dot_backward,
    AdditiveParams, AttentionInput, AttentionResult, LocationParams, Matrix, MultiHeadParams,
};
use ksr_core::augment::{augment, mask_rng, sample_freq_mask, sample_time_mask, AugmentPolicy};
use ksr_core::decode::{beam_decode, greedy_decode, mock_from_table, rescore, MockModel, PosteriorSource};
use ksr_core::dsp::{fft_real, FrameConfig, WindowSpec};
use ksr_core::features::{dct_log_energies, extract, hz_to_mel, mel_to_hz, FeatureParams};
use ksr_core::metrics::{corpus_cer, levenshtein, CerOptions};
use ksr_core::schedules::{smooth_labels, teacher_forcing_ratio, LabelSmoothingSpec, LrScheduleState};
use ksr_core::text::{compose_jamo, decompose_jamo};
use ksr_core::{AudioBuffer, FeatureKind, FeatureMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fft_oracle() -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut worst_parseval = 0.0f64;
    for _ in 0..500 {
        let n = 1usize << rng.random_range(3..=10);
        let len = rng.random_range(1..=n);
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let spec = fft_real(&x, n).map_err(|e| e.to_string())?;
        let full = spec.full_spectrum();
        ensure(full.len() == n, || format!("full spectrum has {} bins for n={n}", full.len()))?;
        let mut energy = 0.0;
        for (k, got) in full.iter().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let ang = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            worst = worst.max((got.re - re).abs()).max((got.im - im).abs());
            energy += re * re + im * im;
        }
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = full.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
        if time > 0.0 {
            worst_parseval = worst_parseval.max((time - freq).abs() / time);
        }
        ensure(((energy / n as f64) - time).abs() <= 1e-6 * time.max(1e-12), || "oracle itself broke Parseval".into())?;
    }
    ensure(worst < 1e-6, || format!("max abs error {worst:e}"))?;
    ensure(worst_parseval < 1e-6, || format!("Parseval relative error {worst_parseval:e}"))?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("500 frames, max err {worst:.1e}, Parseval {worst_parseval:.1e}, {t:.2?}"))
}

fn mel_scale() -> Check {
    ensure(hz_to_mel(0.0).unwrap() == 0.0, || "hz_to_mel(0) != 0".into())?;
    let m700 = hz_to_mel(700.0).unwrap();
    ensure((m700 - 781.17).abs() <= 0.01, || format!("hz_to_mel(700) = {m700}"))?;
    // 2595 log10(2) by hand
    ensure((m700 - 2595.0 * 2f64.log10()).abs() < 1e-9, || "700 Hz disagrees with 2595 log10 2".into())?;
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let f = 8000.0 * i as f64 / 999.0;
        let direct = 2595.0 * (1.0 + f / 700.0).log10();
        let m = hz_to_mel(f).unwrap();
        ensure((m - direct).abs() <= 1e-9 * direct.max(1.0), || format!("hz_to_mel({f}) = {m}, want {direct}"))?;
        let back = mel_to_hz(m).unwrap();
        if f > 0.0 {
            worst = worst.max((back - f).abs() / f);
        } else {
            ensure(back.abs() < 1e-12, || format!("mel_to_hz(0) = {back}"))?;
        }
    }
    ensure(worst < 1e-6, || format!("round-trip relative error {worst:e}"))?;
    Ok(format!("hz_to_mel(700) = {m700:.4}, round trip over 1000 points within {worst:.1e}"))
}

fn mfcc_dct() -> Check {
    let c = 2.5;
    let out = dct_log_energies(&[c; 23], 13);
    ensure((out[0] - 23.0 * c).abs() < 1e-9, || format!("C_0 = {}", out[0]))?;
    for (i, v) in out.iter().enumerate().skip(1) {
        ensure(v.abs() < 1e-9, || format!("C_{i} = {v:e}"))?;
    }
    let mut rng = StdRng::seed_from_u64(2);
    for _ in 0..1000 {
        let b = rng.random_range(1..=80);
        let n = rng.random_range(1..=b);
        let f: Vec<f64> = (0..b).map(|_| rng.random_range(-30.0..10.0)).collect();
        let got = dct_log_energies(&f, n);
        for (i, g) in got.iter().enumerate() {
            let want: f64 = (1..=b)
                .map(|j| f[j - 1] * (i as f64 * PI / b as f64 * (j as f64 - 0.5)).cos())
                .sum();
            ensure((g - want).abs() <= 1e-9 * want.abs().max(1.0), || format!("B={b} C_{i}: {g} vs {want}"))?;
        }
    }
    Ok("constant input keeps only C_0; 1000 random inputs match the cosine sum".into())
}

fn feature_shapes() -> Check {
    let samples: Vec<f64> = (0..16000).map(|i| 0.3 * (i as f64 * 0.05).sin()).collect();
    let buf = AudioBuffer::new(samples, 16000).map_err(|e| e.to_string())?;
    let expected_t = (16000 - 320) / 160 + 1;
    let fbank = extract(&buf, FeatureKind::Fbank, &FrameConfig::new(20.0, 10.0, true), WindowSpec::HAMMING_PAPER, &FeatureParams::default())
        .map_err(|e| e.to_string())?;
    ensure((fbank.rows(), fbank.cols()) == (expected_t, 80), || format!("fbank {}x{}", fbank.rows(), fbank.cols()))?;
    let params = FeatureParams {
        n_fft: Some(320),
        ..FeatureParams::default()
    };
    let logspec = extract(&buf, FeatureKind::LogSpectrogram, &FrameConfig::new(20.0, 10.0, false), WindowSpec::HAMMING_PAPER, &params)
        .map_err(|e| e.to_string())?;
    ensure((logspec.rows(), logspec.cols()) == (99, 320 / 2 + 1), || format!("logspec {}x{}", logspec.rows(), logspec.cols()))?;
    Ok(format!("T = {expected_t}, log spectrogram F = {}, fbank F = {}", logspec.cols(), fbank.cols()))
}

fn spec_augment() -> Check {
    let mut rng = mask_rng(3);
    for i in 0..100_000 {
        let f = sample_freq_mask(80, 20, &mut rng);
        ensure(f.width <= 20 && f.offset + f.width <= 80, || format!("draw {i}: freq mask {f:?}"))?;
        let t = sample_time_mask(1000, 100, 0.05, &mut rng);
        ensure(t.width <= 50 && t.offset + t.width <= 1000, || format!("draw {i}: time mask {t:?}"))?;
    }
    let data: Vec<f64> = (0..300 * 80).map(|i| (i % 97) as f64 * 0.1 + 0.5).collect();
    let m = FeatureMatrix::new(data, 300, 80, FeatureKind::Fbank).map_err(|e| e.to_string())?.with_framing(20.0, 10.0, 16000);
    let policy = AugmentPolicy::baseline(42);
    let (a, masks_a) = augment(&m, &policy).map_err(|e| e.to_string())?;
    let (b, masks_b) = augment(&m, &policy).map_err(|e| e.to_string())?;
    let (bytes_a, bytes_b) = (ksfm::encode(&a).unwrap(), ksfm::encode(&b).unwrap());
    ensure(bytes_a == bytes_b && masks_a == masks_b, || "same seed gave different output".into())?;
    let (c, _) = augment(&m, &AugmentPolicy::baseline(43)).map_err(|e| e.to_string())?;
    ensure(ksfm::encode(&c).unwrap() != bytes_a, || "different seeds gave identical output".into())?;
    Ok("1e5 draws within bounds, time widths <= 50, fixed seed byte-identical".into())
}

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-2.0..2.0))
}

/// Row sums, and each context entry equals the weighted sum of values
/// (so it is a convex combination) and lies within the column's range.
fn check_attention(name: &str, inp: &AttentionInput, r: &AttentionResult, values_per_head: &[Matrix]) -> Result<(), String> {
    for (h, w) in r.weights.iter().enumerate() {
        for i in 0..w.rows() {
            let s: f64 = w.row(i).iter().sum();
            ensure(w.row(i).iter().all(|&x| x >= 0.0), || format!("{name}: negative weight"))?;
            ensure((s - 1.0).abs() < 1e-6, || format!("{name}: head {h} row {i} sums to {s}"))?;
        }
        let v = &values_per_head[h];
        let offset = h * v.cols();
        for i in 0..w.rows() {
            for c in 0..v.cols() {
                let direct: f64 = (0..w.cols()).map(|j| w.get(i, j) * v.get(j, c)).sum();
                let got = r.context.get(i, offset + c);
                ensure((direct - got).abs() < 1e-9, || format!("{name}: context ({i},{c}) {got} vs {direct}"))?;
                let lo = (0..v.rows()).map(|j| v.get(j, c)).fold(f64::INFINITY, f64::min);
                let hi = (0..v.rows()).map(|j| v.get(j, c)).fold(f64::NEG_INFINITY, f64::max);
                ensure(got >= lo - 1e-9 && got <= hi + 1e-9, || format!("{name}: context outside value hull"))?;
            }
        }
    }
    let _ = inp;
    Ok(())
}

fn grad_rel_error(analytic: &Matrix, numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.data().iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = analytic.data().iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

fn attention() -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst_grad = 0.0f64;
    for _ in 0..100 {
        let (n_q, n_k, d, d_v) = (rng.random_range(1..5), rng.random_range(1..8), rng.random_range(1..6), rng.random_range(1..5));
        let inp = AttentionInput::new(random_matrix(&mut rng, n_q, d), random_matrix(&mut rng, n_k, d), random_matrix(&mut rng, n_k, d_v))
            .map_err(|e| e.to_string())?;
        let vs = std::slice::from_ref(&inp.v);
        check_attention("dot", &inp, &dot_attention(&inp, false).map_err(|e| e.to_string())?, vs)?;
        let scaled = dot_attention(&inp, true).map_err(|e| e.to_string())?;
        check_attention("scaled dot", &inp, &scaled, vs)?;

        let hidden = rng.random_range(1..6);
        let add = AdditiveParams {
            w1: random_matrix(&mut rng, hidden, 2 * d),
            w2: (0..hidden).map(|_| rng.random_range(-2.0..2.0)).collect(),
        };
        check_attention("additive", &inp, &additive_attention(&inp, &add).map_err(|e| e.to_string())?, vs)?;

        let filters = rng.random_range(1..4);
        let loc = LocationParams {
            conv_kernel: random_matrix(&mut rng, filters, 3),
            u: random_matrix(&mut rng, hidden, filters),
            w_q: random_matrix(&mut rng, hidden, d),
            w_k: random_matrix(&mut rng, hidden, d),
            w: (0..hidden).map(|_| rng.random_range(-2.0..2.0)).collect(),
            b: (0..hidden).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let raw: Vec<f64> = (0..n_k).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let prev: Vec<f64> = raw.iter().map(|x| x / total).collect();
        check_attention("location", &inp, &location_aware_attention(&inp, &prev, &loc).map_err(|e| e.to_string())?, vs)?;

        // multi-head with identity projections: each head attends over its slice of V
        let heads = [1, 2, 4][rng.random_range(0..3)];
        let d_model = heads * rng.random_range(1..4);
        let mh_in = AttentionInput::new(
            random_matrix(&mut rng, n_q, d_model),
            random_matrix(&mut rng, n_k, d_model),
            random_matrix(&mut rng, n_k, d_model),
        )
        .map_err(|e| e.to_string())?;
        let mh = multi_head_attention(&mh_in, &MultiHeadParams::identity(d_model, heads).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let slices: Vec<Matrix> = (0..heads).map(|h| mh_in.v.columns(h * d_model / heads, d_model / heads)).collect();
        check_attention("multi-head", &mh_in, &mh, &slices)?;
        let one = multi_head_attention(&mh_in, &MultiHeadParams::identity(d_model, 1).unwrap()).unwrap();
        let sd = dot_attention(&mh_in, true).unwrap();
        ensure(one.context == sd.context && one.weights == sd.weights, || "h=1 identity differs from scaled dot".into())?;

        let g = random_matrix(&mut rng, n_q, d_v);
        let grads = scaled_dot_backward(&inp, &g).map_err(|e| e.to_string())?;
        let loss = |q: &Matrix, k: &Matrix, v: &Matrix| -> f64 {
            let x = AttentionInput::new(q.clone(), k.clone(), v.clone()).unwrap();
            let c = dot_attention(&x, true).unwrap().context;
            c.data().iter().zip(g.data()).map(|(a, b)| a * b).sum()
        };
        let h = 1e-5;
        let numeric = |which: usize| -> Vec<f64> {
            let mats = [&inp.q, &inp.k, &inp.v];
            (0..mats[which].data().len())
                .map(|idx| {
                    let mut plus = [inp.q.clone(), inp.k.clone(), inp.v.clone()];
                    let mut minus = plus.clone();
                    plus[which].data_mut()[idx] += h;
                    minus[which].data_mut()[idx] -= h;
                    (loss(&plus[0], &plus[1], &plus[2]) - loss(&minus[0], &minus[1], &minus[2])) / (2.0 * h)
                })
                .collect()
        };
        for (which, analytic) in [(0, &grads.dq), (1, &grads.dk), (2, &grads.dv)] {
            let e = grad_rel_error(analytic, &numeric(which));
            worst_grad = worst_grad.max(e);
        }
    }
    ensure(worst_grad < 1e-4, || format!("gradient relative error {worst_grad:e}"))?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("100 instances x 5 mechanisms, gradient error {worst_grad:.1e}, {t:.2?}"))
}

const EOS: u32 = 2;

/// Mock with an explicit, strictly positive distribution for every prefix
/// reachable within `max_len` tokens.
fn random_mock(rng: &mut StdRng, v: usize, max_len: usize) -> MockModel {
    let mut entries = Vec::new();
    let mut frontier = vec![vec![1u32]];
    for depth in 0..max_len {
        let mut next = Vec::new();
        for p in &frontier {
            let probs: Vec<f64> = (0..v).map(|_| rng.random_range(0.01..1.0)).collect();
            entries.push((p.clone(), probs));
            if depth + 1 < max_len {
                for t in (0..v as u32).filter(|&t| t != EOS) {
                    let mut q = p.clone();
                    q.push(t);
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    mock_from_table(v, max_len, entries).unwrap()
}

/// All `<eos>`-terminated paths, best first (score, then token order).
fn enumerate_paths(src: &MockModel) -> Vec<(Vec<u32>, f64)> {
    let mut done = Vec::new();
    let mut stack = vec![(vec![1u32], 0.0f64)];
    while let Some((prefix, score)) = stack.pop() {
        let probs = src.probs(&prefix);
        for (t, p) in probs.iter().enumerate() {
            let mut tokens = prefix.clone();
            tokens.push(t as u32);
            let s = score + p.ln();
            if t as u32 == EOS {
                done.push((tokens, s));
            } else if tokens.len() <= src.max_len() {
                stack.push((tokens, s));
            }
        }
    }
    done.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    done
}

fn decoding() -> Check {
    let mut rng = StdRng::seed_from_u64(5);
    for i in 0..1000 {
        let (v, l) = (rng.random_range(3..=8), rng.random_range(1..=5));
        let m = random_mock(&mut rng, v, l);
        let g = greedy_decode(&m).map_err(|e| e.to_string())?;
        let b = beam_decode(&m, 1, false).map_err(|e| e.to_string())?;
        ensure(b.len() == 1 && b[0] == g, || format!("source {i}: beam(1) {:?} vs greedy {:?}", b, g))?;
    }
    let mut exhaustive = 0;
    let mut worst_rescore = 0.0f64;
    for v in 3..=4 {
        for l in 1..=5 {
            for _ in 0..20 {
                let m = random_mock(&mut rng, v, l);
                let paths = enumerate_paths(&m);
                let k = v.pow(l as u32);
                let beams = beam_decode(&m, k, false).map_err(|e| e.to_string())?;
                ensure(beams[0].tokens == paths[0].0, || format!("V={v} L={l}: beam {:?} vs oracle {:?}", beams[0].tokens, paths[0].0))?;
                ensure((beams[0].log_prob - paths[0].1).abs() < 1e-9, || "best score differs from oracle".into())?;
                for h in beams.iter().chain(beam_decode(&m, 3, false).unwrap().iter()) {
                    let direct: f64 = (1..h.tokens.len()).map(|i| m.probs(&h.tokens[..i])[h.tokens[i] as usize].ln()).sum();
                    let lib = rescore(&m, &h.tokens).map_err(|e| e.to_string())?;
                    worst_rescore = worst_rescore.max((direct - h.log_prob).abs()).max((lib - h.log_prob).abs());
                }
                exhaustive += 1;
            }
        }
    }
    ensure(worst_rescore < 1e-9, || format!("rescore error {worst_rescore:e}"))?;
    Ok(format!("beam(1) = greedy on 1000 sources, {exhaustive} exhaustive matches, rescore within {worst_rescore:.1e}"))
}

fn table_levenshtein(a: &[u8], b: &[u8]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in t[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t[a.len()][b.len()]
}

fn cer_metric() -> Check {
    let d = levenshtein(&b"kitten"[..], &b"sitting"[..]);
    ensure(d == 3, || format!("kitten/sitting = {d}"))?;
    let mut rng = StdRng::seed_from_u64(6);
    let word = |rng: &mut StdRng| -> Vec<u8> { (0..rng.random_range(0..12)).map(|_| b'a' + rng.random_range(0..4u8)).collect() };
    for _ in 0..10_000 {
        let (a, b, c) = (word(&mut rng), word(&mut rng), word(&mut rng));
        let ab = levenshtein(&a, &b);
        ensure(ab == table_levenshtein(&a, &b), || format!("{a:?} {b:?}: {ab}"))?;
        ensure(ab == levenshtein(&b, &a), || "not symmetric".into())?;
        ensure((ab == 0) == (a == b), || "identity of indiscernibles".into())?;
        ensure(levenshtein(&a, &c) <= ab + levenshtein(&b, &c), || "triangle inequality".into())?;
    }
    let pairs = [("abcx", "abcd"), ("xyzdef", "abcdef")];
    let pooled = corpus_cer(&pairs, &CerOptions::default()).map_err(|e| e.to_string())?;
    ensure((pooled.distance, pooled.ref_len) == (4, 10), || format!("pooled counts {pooled:?}"))?;
    ensure(pooled.cer_percent == 40.0, || format!("pooled CER {}", pooled.cer_percent))?;
    Ok("kitten/sitting = 3, axioms on 1e4 pairs, pooled CER 40%".into())
}

fn schedules() -> Check {
    for e in 0..=100u32 {
        let want = f64::max(1.0 - 0.02 * f64::from(e), 0.8);
        let got = teacher_forcing_ratio(e);
        ensure(got == want, || format!("epoch {e}: {got} vs {want}"))?;
    }
    let lr = LrScheduleState::default();
    for (step, want) in [(0, 0.0), (200, 1.5e-4), (400, 3e-4)] {
        let got = lr.lr_on_step(step);
        ensure((got - want).abs() <= 1e-15, || format!("step {step}: {got}"))?;
    }
    let p = smooth_labels(0, &LabelSmoothingSpec::new(5)).map_err(|e| e.to_string())?;
    ensure((p[0] - 0.92).abs() < 1e-12, || format!("true class {}", p[0]))?;
    ensure(p[1..].iter().all(|x| (x - 0.02).abs() < 1e-12), || format!("others {:?}", &p[1..]))?;
    let s: f64 = p.iter().sum();
    ensure((s - 1.0).abs() < 1e-12, || format!("sum {s}"))?;
    Ok("teacher forcing table, warmup 0/1.5e-4/3e-4, smoothing (0.92, 0.02 x4)".into())
}

const L: [char; 19] = ['ㄱ', 'ㄲ', 'ㄴ', 'ㄷ', 'ㄸ', 'ㄹ', 'ㅁ', 'ㅂ', 'ㅃ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅉ', 'ㅊ', 'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ'];
const V: [char; 21] = [
    'ㅏ', 'ㅐ', 'ㅑ', 'ㅒ', 'ㅓ', 'ㅔ', 'ㅕ', 'ㅖ', 'ㅗ', 'ㅘ', 'ㅙ', 'ㅚ', 'ㅛ', 'ㅜ', 'ㅝ', 'ㅞ', 'ㅟ', 'ㅠ', 'ㅡ', 'ㅢ', 'ㅣ',
];
const T: [char; 27] = [
    'ㄱ', 'ㄲ', 'ㄳ', 'ㄴ', 'ㄵ', 'ㄶ', 'ㄷ', 'ㄹ', 'ㄺ', 'ㄻ', 'ㄼ', 'ㄽ', 'ㄾ', 'ㄿ', 'ㅀ', 'ㅁ', 'ㅂ', 'ㅄ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ',
    'ㅊ', 'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ',
];

fn jamo() -> Check {
    for code in 0xAC00u32..=0xD7A3 {
        let s = char::from_u32(code).unwrap().to_string();
        let idx = code - 0xAC00;
        let (l, v, t) = ((idx / 588) as usize, (idx % 588 / 28) as usize, (idx % 28) as usize);
        let mut want = vec![L[l], V[v]];
        if t > 0 {
            want.push(T[t - 1]);
        }
        let got = decompose_jamo(&s);
        ensure(got == want, || format!("{s}: {got:?} vs {want:?}"))?;
        let back = compose_jamo(&got).map_err(|e| e.to_string())?;
        ensure(back == s, || format!("{s} composed back to {back}"))?;
    }
    ensure(decompose_jamo("한") == ['ㅎ', 'ㅏ', 'ㄴ'], || "한".into())?;
    Ok("11172 syllables round trip, 한 = ㅎㅏㄴ".into())
}

fn write_inputs(dir: &Path) {
    let mut manifest = String::new();
    for (i, (f, text)) in [(300.0, "안녕 하세요"), (520.0, "반갑습니다"), (770.0, "네 좋아요")].iter().enumerate() {
        let rate = 16000;
        let samples: Vec<f64> = (0..rate * 2)
            .map(|n| {
                let t = n as f64 / rate as f64;
                if (0.4..1.6).contains(&t) {
                    0.4 * (2.0 * PI * f * t).sin()
                } else {
                    0.0005 * ((n * 7919 % 101) as f64 / 50.0 - 1.0)
                }
            })
            .collect();
        let buf = AudioBuffer::new(samples, rate as u32).unwrap();
        fs::write(dir.join(format!("u{i}.wav")), wav::encode_wav(&buf)).unwrap();
        manifest.push_str(&format!("u{i}\tu{i}.wav\t{text}\n"));
    }
    fs::write(dir.join("in.tsv"), manifest).unwrap();
}

fn ksr(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ksr")).args(args).current_dir(dir).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("ksr {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn pipeline(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    write_inputs(dir);
    ksr(dir, &["trim", "--manifest", "in.tsv", "--out-dir", "trim"])?;
    ksr(dir, &["featurize", "--manifest", "trim/manifest.tsv", "--out-dir", "feat", "--profile", "paper-baseline", "--jobs", "3"])?;
    ksr(dir, &["augment", "--manifest", "feat/manifest.tsv", "--out-dir", "aug", "--seed", "7"])?;
    ksr(dir, &["prep", "--manifest", "in.tsv", "--out-dir", "prep"])?;
    let vocab = fs::read_to_string(dir.join("prep/vocab.txt")).unwrap();
    let v = vocab.lines().count();
    let mut mock = String::new();
    for t in 4..v {
        let probs: Vec<String> = (0..v).map(|j| if j == 2 { "1".into() } else { ((j * t) % 5 + 1).to_string() }).collect();
        mock.push_str(&format!("{t} -> {}\n", probs.join(" ")));
    }
    fs::write(dir.join("mock.txt"), mock).unwrap();
    ksr(dir, &["decode", "--manifest", "aug/manifest.tsv", "--mock-model", "mock.txt", "--beam", "3", "--max-len", "8", "--out", "hyp.tsv"])?;
    ksr(dir, &["score", "--hyp", "hyp.tsv", "--ref", "in.tsv", "--vocab", "prep/vocab.txt", "--out", "score.tsv"])?;
    let mut files = Vec::new();
    for sub in ["trim", "feat", "aug"] {
        let mut names: Vec<_> = fs::read_dir(dir.join(sub)).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names {
            let rel = format!("{sub}/{}", n.to_string_lossy());
            files.push((rel.clone(), fs::read(dir.join(&rel)).unwrap()));
        }
    }
    for rel in ["prep/vocab.txt", "hyp.tsv", "score.tsv"] {
        files.push((rel.to_owned(), fs::read(dir.join(rel)).unwrap()));
    }
    Ok(files)
}

fn end_to_end() -> Check {
    let start = Instant::now();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path())?;
    let t = start.elapsed();
    let second = pipeline(b.path())?;
    ensure(t < Duration::from_secs(10), || format!("one run took {t:?}"))?;
    ensure(first.len() == second.len(), || "different file sets".into())?;
    for ((na, ba), (nb, bb)) in first.iter().zip(&second) {
        ensure(na == nb && ba == bb, || format!("{na} differs between runs"))?;
    }
    let feat = ksfm::read(&a.path().join("feat/u0.ksfm")).map_err(|e| e.to_string())?;
    ensure(feat.cols() == 80 && feat.kind() == FeatureKind::Fbank, || "paper-baseline is not 80-band fbank".into())?;
    let score = fs::read_to_string(a.path().join("score.tsv")).unwrap();
    ensure(score.lines().any(|l| l.starts_with("pooled\t")), || "score has no pooled line".into())?;
    Ok(format!("{} files byte-identical across runs, one run {t:.2?}", first.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("fft-oracle", fft_oracle),
        ("mel-scale", mel_scale),
        ("mfcc-dct", mfcc_dct),
        ("feature-shapes", feature_shapes),
        ("spec-augment", spec_augment),
        ("attention", attention),
        ("decoding", decoding),
        ("cer", cer_metric),
        ("schedules", schedules),
        ("jamo", jamo),
        ("end-to-end-cli", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
