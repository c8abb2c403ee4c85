//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::HashSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;

use quadvar::counting::{
    analyze_shift, c0_from_cubes, config10_count, config10_count_naive, config10_meets_density_bound,
    cube_completion_probability, cube_count, cube_count_naive, quadruple_count, quadruple_count_naive, subspace_set,
};
use quadvar::forms::{decode_vec, BilinearMap};
use quadvar::fourier::{convolve, fourier, fourier_set, inverse_fourier, FourierPlan, RealTable};
use quadvar::generators::{
    coset_probability_sandwich, gen_polynomial_pullback, gen_sidon_counterexample, random_coset_probability,
    random_coset_probability_mc, random_quadratic_map, random_set, rng_from_seed, sidon_part, GeneratorSpec,
};
use quadvar::linalg::{quadruple_isomorphisms, repair_to_isomorphism, LinearMap, Matrix, Subspace};
use quadvar::recovery::{recover, RecoveryConfig};
use quadvar::{GSubset, VectorSpaceCtx};

type Outcome = Result<String, String>;

fn ctx(p: u32, n: u32) -> VectorSpaceCtx {
    VectorSpaceCtx::new(p, n).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The corpus shared by the counting criteria.
fn corpus() -> Vec<(String, GSubset)> {
    let mut out = Vec::new();
    let c3 = ctx(3, 3);
    let vecs: Vec<Vec<u32>> = (0..27).map(|i| c3.decode(i)).collect();
    let mut subspaces = HashSet::new();
    for a in &vecs {
        for b in &vecs {
            for c in &vecs {
                subspaces.insert(Subspace::span(3, 3, &[a.clone(), b.clone(), c.clone()]));
            }
        }
    }
    let mut subspaces: Vec<Subspace> = subspaces.into_iter().collect();
    subspaces.sort_by_key(|s| (s.dim(), s.basis_vecs()));
    assert_eq!(subspaces.len(), 28);
    for (i, s) in subspaces.iter().enumerate() {
        out.push((format!("subspace#{i}"), subspace_set(c3, s).unwrap()));
    }
    let densities = [0.2, 0.35, 0.5];
    for n in 3..=5 {
        for k in 0..50u64 {
            let d = densities[k as usize % 3];
            let set = random_set(ctx(3, n), d, &mut rng_from_seed(1000 * n as u64 + k)).unwrap();
            out.push((format!("random n={n} #{k}"), set));
        }
    }
    for (n, t) in [(2, 2), (3, 2), (4, 2), (4, 4), (5, 4)] {
        out.push((format!("sidon n={n} t={t}"), gen_sidon_counterexample(ctx(3, n), t).unwrap()));
    }
    for (n, d, l, seed) in [(3, 1, 0, 1), (4, 1, 0, 2), (4, 2, 1, 3), (5, 1, 0, 4), (5, 2, 0, 5)] {
        let g = GeneratorSpec::LayerVariety { p: 3, n, d, lambda_dim: l, seed }.generate().unwrap();
        out.push((format!("layer n={n} d={d}"), g.set));
    }
    out
}

fn c1_oracles(corpus: &[(String, GSubset)]) -> Outcome {
    let failures: Vec<String> = corpus
        .par_iter()
        .filter_map(|(name, s)| {
            let q = (quadruple_count(s), quadruple_count_naive(s));
            let c = (cube_count(s), cube_count_naive(s));
            let t = (config10_count(s), config10_count_naive(s));
            (q.0 != q.1 || c.0 != c.1 || t.0 != t.1).then(|| format!("{name}: {q:?} {c:?} {t:?}"))
        })
        .collect();
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{} sets, quadruple/cube/config10 counts equal", corpus.len()))
}

fn random_table(c: VectorSpaceCtx, rng: &mut impl Rng) -> RealTable {
    let vals: Vec<f64> = (0..c.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    RealTable::new(c, vals).unwrap()
}

fn c2_fourier() -> Outcome {
    let mut worst = 0.0f64;
    let mut rng = rng_from_seed(2);
    for k in 0..200 {
        let c = ctx(3, [2, 3, 4, 5][k % 4]);
        let size = c.size();
        let f = random_table(c, &mut rng);
        let g = random_table(c, &mut rng);
        let fh = fourier(&f);
        let gh = fourier(&g);
        // Parseval
        let lhs: f64 = f.values().iter().map(|x| x * x).sum::<f64>() / size as f64;
        let rhs: f64 = fh.values().iter().map(|z| z.norm_sqr()).sum();
        worst = worst.max((lhs - rhs).abs());
        // inversion
        let back = inverse_fourier(&fh);
        for (x, z) in f.values().iter().zip(&back) {
            worst = worst.max((x - z.re).abs()).max(z.im.abs());
        }
        // convolution theorem: (E_y f(y + x) g(y))^ = f̂ · conj(ĝ)
        let conv = convolve(&f, &g).unwrap();
        let direct: Vec<f64> = (0..size)
            .map(|x| (0..size).map(|y| f.values()[c.add_idx(y, x)] * g.values()[y]).sum::<f64>() / size as f64)
            .collect();
        for (a, b) in conv.values().iter().zip(&direct) {
            worst = worst.max((a - b).abs());
        }
        let ch = fourier(&RealTable::new(c, direct).unwrap());
        for r in 0..size {
            worst = worst.max((ch.get(r) - fh.get(r) * gh.get(r).conj()).norm());
        }
        // U² norm from the spectrum against the defining average
        if size <= 81 {
            let mut avg = 0.0;
            for x in 0..size {
                for a in 0..size {
                    let xa = c.add_idx(x, a);
                    for b in 0..size {
                        let v = f.values();
                        avg += v[x] * v[xa] * v[c.add_idx(x, b)] * v[c.add_idx(xa, b)];
                    }
                }
            }
            avg /= (size * size * size) as f64;
            worst = worst.max((avg - fh.fourth_moment()).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    let mut rng = rng_from_seed(22);
    for n in 2..=5 {
        let a = random_set(ctx(3, n), 0.4, &mut rng).unwrap();
        let g = a.ctx().size() as f64;
        let spectral: f64 = fourier_set(&a).fourth_moment() * g.powi(3);
        let rounded = spectral.round() as u128;
        let naive = quadruple_count_naive(&a);
        ensure(rounded == naive, || format!("n={n}: rounded {spectral} vs {naive}"))?;
    }
    Ok(format!("200 tables, max deviation {worst:.2e}; quadruple identity exact"))
}

fn c3_duality() -> Outcome {
    for seed in 0..10 {
        let v = random_set(ctx(3, 4), 0.3 + 0.04 * seed as f64, &mut rng_from_seed(300 + seed)).unwrap();
        let plan = FourierPlan::new(v.ctx());
        let counts: Vec<Vec<u64>> = (0..81).map(|a| analyze_shift(&plan, &v, a).counts).collect();
        for a in 0..81 {
            for b in 0..81 {
                ensure(counts[a][b] == counts[b][a], || format!("seed {seed}: ({a}, {b})"))?;
                // and against direct enumeration
                let direct = (0..81)
                    .filter(|&x| {
                        let y = v.ctx().add_idx(x, b);
                        [x, y].iter().all(|&z| v.contains(z) && v.contains(v.ctx().add_idx(z, a)))
                    })
                    .count() as u64;
                ensure(direct == counts[a][b], || format!("seed {seed}: direct mismatch at ({a}, {b})"))?;
            }
        }
    }
    Ok("10 sets at |G| = 81, all (a, b) equal".into())
}

fn c4_bias() -> Outcome {
    let mut rng = rng_from_seed(4);
    let mut worst = 0.0f64;
    let mut directions = 0;
    for k in 0..50 {
        let n = 1 + k % 4;
        let d = 1 + k % 3;
        let c = ctx(3, n as u32);
        let ms: Vec<Matrix> = (0..d).map(|_| Matrix::from_fn(3, n, n, |_, _| rng.gen_range(0..3))).collect();
        let beta = BilinearMap::new(c, ms).unwrap();
        for code in 1..3usize.pow(d as u32) {
            let lambda = decode_vec(3, d, code);
            let rank = beta.direction(&lambda).unwrap().rank();
            let direct = beta.bias_character_sum(&lambda).unwrap();
            worst = worst.max((direct - 3f64.powi(-(rank as i32))).abs());
            worst = worst.max((beta.bias(&lambda).unwrap() - direct).abs());
            directions += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("50 maps, {directions} directions, max deviation {worst:.2e}"))
}

fn c5_config10(corpus: &[(String, GSubset)]) -> Outcome {
    let mut checked = 0;
    for (name, s) in corpus {
        let g = s.ctx().size() as u64;
        if g > 81 || s.len() * 3 < g {
            continue;
        }
        let count = config10_count(s);
        ensure(config10_meets_density_bound(s, count), || format!("{name}: {count} below c^32 |G|^6"))?;
        checked += 1;
    }
    ensure(checked > 0, || "no corpus set qualifies".into())?;
    Ok(format!("{checked} sets of density ≥ 1/3"))
}

fn random_subspace(p: u32, n: usize, dim: usize, rng: &mut impl Rng) -> Subspace {
    Subspace::random(p, n, dim, rng)
}

fn c6_linear() -> Outcome {
    let mut rng = rng_from_seed(6);
    for k in 0..1000 {
        let d = 1 + k % 4;
        let p = [3, 5][k % 2];
        // bias toward singular maps by sometimes zeroing a random row combination
        let mut m = Matrix::from_fn(p, d, d, |_, _| rng.gen_range(0..p));
        if k % 3 == 0 {
            let r = rng.gen_range(0..d);
            for c in 0..d {
                m.set(r, c, 0);
            }
        }
        let phi = LinearMap::new(m);
        let fixed = repair_to_isomorphism(&phi).map_err(|e| e.to_string())?;
        ensure(fixed.is_invertible(), || format!("map {k} not invertible"))?;
        let defect = fixed.sub(&phi).unwrap().rank();
        ensure(defect == phi.nullity(), || format!("map {k}: defect {defect} vs nullity {}", phi.nullity()))?;
    }
    let mut k1 = 0;
    let mut done = 0;
    let mut attempts = 0;
    while done < 500 {
        attempts += 1;
        let n = 4 + attempts % 5;
        let d = 1 + attempts % 2;
        let p = 3;
        let mut us: Vec<Subspace> = (0..3).map(|_| random_subspace(p, n, d, &mut rng)).collect();
        // half the quadruples have U4 inside U1 + U2 + U3
        let u4 = if attempts % 2 == 0 {
            let outer = us[0].sum(&us[1]).unwrap().sum(&us[2]).unwrap();
            if outer.dim() < d {
                continue;
            }
            let coeffs: Vec<Vec<u32>> = (0..d).map(|_| (0..outer.dim()).map(|_| rng.gen_range(0..p)).collect()).collect();
            let vecs: Vec<Vec<u32>> = coeffs.iter().map(|c| outer.combine(c)).collect();
            Subspace::span(p, n, &vecs)
        } else {
            random_subspace(p, n, d, &mut rng)
        };
        if u4.dim() != d || us.iter().any(|u| u.dim() != d) {
            continue;
        }
        us.push(u4);
        let us: [Subspace; 4] = us.try_into().unwrap();
        let phi4 = LinearMap::basis_map(&us[3]);
        let iso = quadruple_isomorphisms(&us, &phi4, None).map_err(|e| e.to_string())?;
        ensure(iso.defect_rank <= iso.bound(), || format!("defect {} > 20·{}", iso.defect_rank, iso.log_p_k))?;
        if iso.log_p_k == 0 {
            k1 += 1;
            ensure(iso.defect_rank == 0, || format!("K = 1 but defect {}", iso.defect_rank))?;
        }
        done += 1;
    }
    Ok(format!("1000 repairs exact; 500 quadruples within bound, {k1} with K = 1 and defect 0"))
}

fn c7_sidon() -> Outcome {
    for (n, t) in [(4u32, 2usize), (6, 4), (8, 4)] {
        let c = ctx(3, n);
        let v = gen_sidon_counterexample(c, t).unwrap();
        let prob = cube_completion_probability(&v).unwrap();
        ensure(prob == num_rational::Ratio::from_integer(1), || format!("n={n} t={t}: completion {prob}"))?;
        let s = sidon_part(c, t).unwrap();
        let k = s.len() as u128;
        let q = quadruple_count(&s);
        ensure(q == 2 * k * k - k, || format!("n={n} t={t}: {q} quadruples, |S| = {k}"))?;
        ensure(q == quadruple_count_naive(&s), || "fast and naive disagree".into())?;
    }
    Ok("completion probability 1 and 2|S|²−|S| quadruples for dim T = 2, 4".into())
}

fn product_formula(p: u32, n: u32, d: u32, m: u32) -> BigRational {
    let pb = BigInt::from(p);
    (0..m).fold(BigRational::from_integer(1.into()), |acc, k| {
        acc * BigRational::new(pb.pow(n - d) - pb.pow(k), pb.pow(n) - pb.pow(k))
    })
}

fn c8_coset() -> Outcome {
    let mut tuples = Vec::new();
    for p in [3u32, 5] {
        for n in 4..=8u32 {
            for d in 1..=2u32 {
                for m in (1..=3u32).filter(|&m| m + d <= n) {
                    tuples.push((p, n, d, m));
                }
            }
        }
    }
    let samples = 100_000u64;
    let bad: Vec<String> = tuples
        .par_iter()
        .filter_map(|&(p, n, d, m)| {
            let exact = random_coset_probability(p, n, d, m).unwrap();
            if exact != product_formula(p, n, d, m) {
                return Some(format!("{p},{n},{d},{m}: product mismatch"));
            }
            let x = num_traits::ToPrimitive::to_f64(&exact).unwrap();
            let seed = (p as u64) << 24 | (n as u64) << 16 | (d as u64) << 8 | m as u64;
            let mc = random_coset_probability_mc(p, n, d, m, samples, seed).unwrap();
            let sigma = (x * (1.0 - x) / samples as f64).sqrt();
            ((mc - x).abs() > 3.0 * sigma).then(|| format!("{p},{n},{d},{m}: mc {mc} vs {x} (σ {sigma:.2e})"))
        })
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    let mut sandwiches = 0;
    for p in [3u32, 5] {
        for n in 1..=12u32 {
            for d in 1..n {
                for m in 1..=(n - d) {
                    let exact = random_coset_probability(p, n, d, m).unwrap();
                    let (lo, hi) = coset_probability_sandwich(p, n, d, m);
                    ensure(lo <= exact && exact <= hi, || format!("sandwich fails at {p},{n},{d},{m}"))?;
                    sandwiches += 1;
                }
            }
        }
    }
    Ok(format!("{} tuples exact and within 3σ of 1e5 samples; {sandwiches} sandwiches hold", tuples.len()))
}

fn c9_pullback() -> Outcome {
    let c = ctx(3, 6);
    let mut rng = rng_from_seed(9);
    let a = random_set(c, 0.95, &mut rng).unwrap();
    let delta_a = a.density_f64();
    ensure(delta_a >= 0.9, || format!("δ_A = {delta_a}"))?;
    let f = random_quadratic_map(c, 3, &mut rng).unwrap();
    let good = (0..200u64)
        .into_par_iter()
        .filter(|&k| {
            let v = gen_polynomial_pullback(&a, &f, 1, &mut rng_from_seed(9000 + k)).unwrap();
            let delta = v.density_f64();
            let in_range = delta >= 0.5 / 3.0 * delta_a && delta <= 2.0 / 3.0;
            let c0 = num_traits::ToPrimitive::to_f64(&c0_from_cubes(&v, cube_count(&v))).unwrap();
            in_range && c0 >= 0.5
        })
        .count();
    ensure(good >= 180, || format!("only {good}/200 draws qualify"))?;
    Ok(format!("{good}/200 draws with δ in range and c0 ≥ 0.5"))
}

fn c10_recovery() -> Outcome {
    let cfg = RecoveryConfig::default();
    let mut notes = Vec::new();
    for n in [6u32, 8] {
        let mut noisy_ok = 0;
        let mut min_overlap = 1.0f64;
        let mut max_ratio = 0.0f64;
        for seed in 0..20u64 {
            let base = GeneratorSpec::LayerVariety { p: 3, n, d: 1, lambda_dim: 0, seed };
            let v = base.generate().unwrap().set;
            let r = recover(&v, &cfg).map_err(|e| format!("n={n} seed={seed}: {e}"))?;
            ensure(r.overlap >= 0.99 && r.size_ratio <= 3.0, || {
                format!("n={n} seed={seed}: overlap {} ratio {}", r.overlap, r.size_ratio)
            })?;
            min_overlap = min_overlap.min(r.overlap);
            max_ratio = max_ratio.max(r.size_ratio);
            let noisy = GeneratorSpec::Perturbed { base: Box::new(base), noise: 0.02, seed: 500 + seed };
            let v = noisy.generate().unwrap().set;
            if let Ok(r) = recover(&v, &cfg) {
                noisy_ok += (r.overlap >= 0.9) as usize;
            }
        }
        ensure(noisy_ok >= 18, || format!("n={n}: noisy overlap ≥ 0.9 on only {noisy_ok}/20"))?;
        notes.push(format!("n={n}: min overlap {min_overlap:.3}, max ratio {max_ratio:.3}, noisy {noisy_ok}/20"));
    }
    Ok(notes.join("; "))
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_quadvar")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn c11_negative(dir: &Path) -> Outcome {
    let mut cases: Vec<Vec<String>> = Vec::new();
    for (n, t) in [(6, 4), (8, 4), (8, 6)] {
        cases.push(
            ["--kind", "sidon", "--n", &n.to_string(), "--t-dim", &t.to_string()].iter().map(|s| s.to_string()).collect(),
        );
    }
    for n in [6, 7] {
        for seed in 0..5 {
            cases.push(
                ["--kind", "random", "--n", &n.to_string(), "--density", "0.3333333333333333", "--seed", &seed.to_string()]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
        }
    }
    for (i, case) in cases.iter().enumerate() {
        let set = dir.join(format!("neg{i}.fpnset"));
        let mut args: Vec<&str> = vec!["gen"];
        args.extend(case.iter().map(String::as_str));
        args.extend(["--out", path_str(&set)]);
        let (code, _) = cli(&args);
        ensure(code == 0, || format!("gen {case:?} exited {code}"))?;
        let mut runs = Vec::new();
        for r in 0..2 {
            let m = dir.join(format!("neg{i}-{r}.json"));
            let (code, _) = cli(&["recover", path_str(&set), "--metrics-out", path_str(&m)]);
            let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
            let rec = &report["recovery"];
            let status = rec["status"].as_str().unwrap_or("");
            let overlap = rec["overlap"].as_f64();
            let refused = (status == "refused" && code == 3) || status == "low_confidence";
            ensure(refused, || format!("{case:?}: status {status:?}, exit {code}"))?;
            ensure(overlap.map_or(true, |o| o < 0.5), || format!("{case:?}: overlap {overlap:?}"))?;
            runs.push(std::fs::read(&m).unwrap());
        }
        ensure(runs[0] == runs[1], || format!("{case:?}: reports differ between runs"))?;
    }
    Ok(format!("{} negative instances refused, deterministically", cases.len()))
}

fn c12_determinism(dir: &Path) -> Outcome {
    let set = dir.join("det.fpnset");
    let set_s = path_str(&set).to_string();
    let commands: Vec<Vec<String>> = vec![
        vec!["gen", "--kind", "layer", "--p", "3", "--n", "6", "--d", "1", "--seed", "7", "--noise", "0.01", "--out", &set_s],
        vec!["analyze", &set_s],
        vec!["recover", &set_s, "--seed", "3"],
        vec!["census", &set_s, "--config10"],
        vec!["verify", &set_s, "--seed", "5"],
        vec!["prob", "--p", "3", "--n-max", "6", "--samples", "2000", "--seed", "1"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    for (i, c) in commands.iter().enumerate() {
        let mut outs = Vec::new();
        for r in 0..2 {
            let m = dir.join(format!("det{i}-{r}.json"));
            let mut args: Vec<&str> = c.iter().map(String::as_str).collect();
            args.extend(["--metrics-out", path_str(&m)]);
            let (code, stdout) = cli(&args);
            ensure(code == 0, || format!("{} exited {code}", c[0]))?;
            let full: serde_json::Value = serde_json::from_str(&stdout).map_err(|e| e.to_string())?;
            ensure(full["envelope"]["timings"].is_object(), || "missing timings".into())?;
            let bytes = std::fs::read(&m).unwrap();
            let report: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
            for key in ["config", "version", "seed", "metrics"] {
                ensure(report.get(key).is_some(), || format!("{} report lacks {key}", c[0]))?;
            }
            outs.push(bytes);
        }
        ensure(outs[0] == outs[1], || format!("{} reports differ", c[0]))?;
    }
    Ok(format!("{} commands byte-identical across runs", commands.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let t = Instant::now();
    let corpus = corpus();
    let corpus_time = t.elapsed();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("oracle equivalence", Box::new(|| c1_oracles(&corpus))),
        ("Fourier identities", Box::new(c2_fourier)),
        ("convolution duality", Box::new(c3_duality)),
        ("bias law", Box::new(c4_bias)),
        ("ten-point configuration bound", Box::new(|| c5_config10(&corpus))),
        ("repair and quadruple isomorphisms", Box::new(c6_linear)),
        ("Sidon counterexample", Box::new(c7_sidon)),
        ("random coset probability", Box::new(c8_coset)),
        ("polynomial pullback", Box::new(c9_pullback)),
        ("end-to-end recovery", Box::new(c10_recovery)),
        ("negative control", Box::new(|| c11_negative(dir.path()))),
        ("determinism", Box::new(|| c12_determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64() + if i == 0 { corpus_time.as_secs_f64() } else { 0.0 };
        match r {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
