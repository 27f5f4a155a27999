use grc::adversarial::*;
use grc::exec::Execution;
use grc::gf::{ExtField, Field, FieldOps, TowerElement};
use grc::graphrepair::{Scheme, StorageGraph};
use grc::Error;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn fig5_code() -> &'static ConcatCode {
    static CODE: OnceLock<ConcatCode> = OnceLock::new();
    CODE.get_or_init(|| ConcatCode::fig5().unwrap())
}

fn random_message<R: Rng>(c: &GabidulinCode, r: &mut R) -> Vec<TowerElement> {
    (0..c.dim()).map(|_| c.ext().random(r)).collect()
}

/// Error of `F_q`-rank exactly `rank`.
fn rank_error<R: Rng>(ext: &ExtField, n: usize, rank: usize, r: &mut R) -> Vec<TowerElement> {
    loop {
        let basis: Vec<TowerElement> = (0..rank).map(|_| ext.random(r)).collect();
        let e: Vec<TowerElement> = (0..n)
            .map(|_| {
                basis.iter().fold(ext.zero(), |acc, b| ext.add(&acc, &ext.scale(ext.base().random(r), b)))
            })
            .collect();
        if ext.rank_over_base(&e) == rank {
            return e;
        }
    }
}

fn add(ext: &ExtField, a: &[TowerElement], b: &[TowerElement]) -> Vec<TowerElement> {
    a.iter().zip(b).map(|(x, y)| ext.add(x, y)).collect()
}

#[test]
fn gabidulin_is_linear_and_zero_preserving() {
    let c = GabidulinCode::new(&Field::gf16(), 8, 7, 3).unwrap();
    let e = c.ext();
    assert!(c.encode(&vec![e.zero(); 3]).unwrap().iter().all(|x| e.is_zero(x)));
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (a, b) = (random_message(&c, &mut r), random_message(&c, &mut r));
        let s = e.random(&mut r);
        let lhs = c.encode(&add(e, &a, &b.iter().map(|x| e.mul(&s, x)).collect::<Vec<_>>())).unwrap();
        let ea = c.encode(&a).unwrap();
        let eb: Vec<TowerElement> = c.encode(&b).unwrap().iter().map(|x| e.mul(&s, x)).collect();
        assert_eq!(lhs, add(e, &ea, &eb));
    }
    assert_eq!(c.encode(&[e.one()]), Err(Error::Length { expected: 3, got: 1 }));
}

#[test]
fn single_coefficient_scales_the_points() {
    let c = GabidulinCode::new(&Field::gf2(), 3, 3, 1).unwrap();
    let e = c.ext();
    let f0 = e.gamma();
    let expect: Vec<TowerElement> = c.points().iter().map(|g| e.mul(&f0, g)).collect();
    assert_eq!(c.encode(&[f0]).unwrap(), expect);
}

#[test]
fn tiny_code_distance_and_oracle() {
    let c = GabidulinCode::new(&Field::gf2(), 3, 3, 1).unwrap();
    let e = c.ext().clone();
    let msgs = c.all_messages().unwrap();
    assert_eq!(msgs.len(), 8);
    let words: Vec<_> = msgs.iter().map(|m| c.encode(m).unwrap()).collect();
    let mut min = usize::MAX;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            min = min.min(c.rank_distance(&words[i], &words[j]));
        }
    }
    assert_eq!(min, c.min_distance());
    // every rank-1 error: an element times a nonzero base vector
    let all_elems: Vec<TowerElement> = (0..8u32).map(|x| e.recombine(&[x & 1, (x >> 1) & 1, x >> 2]).unwrap()).collect();
    let mut count = 0;
    for m in &msgs {
        let cw = c.encode(m).unwrap();
        for w in all_elems.iter().filter(|x| !e.is_zero(x)) {
            for pattern in 1..8u32 {
                let err: Vec<TowerElement> = (0..3).map(|i| e.scale((pattern >> i) & 1, w)).collect();
                assert_eq!(e.rank_over_base(&err), 1);
                let y = add(&e, &cw, &err);
                assert_eq!(c.decode(&y).unwrap(), *m);
                assert_eq!(c.decode_bruteforce(&y).unwrap().as_ref(), Some(m));
                count += 1;
            }
        }
    }
    assert_eq!(count, 8 * 7 * 7);
}

#[test]
fn fig5_outer_code_corrects_rank_five() {
    let c = fig5_code().outer();
    assert_eq!((c.len(), c.dim(), c.min_distance(), c.radius()), (25, 15, 11, 5));
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for i in 0..100 {
        let m = random_message(c, &mut r);
        let cw = c.encode(&m).unwrap();
        if i < 5 {
            assert_eq!(c.decode(&cw).unwrap(), m);
        }
        let y = add(c.ext(), &cw, &rank_error(c.ext(), 25, 5, &mut r));
        assert_eq!(c.decode(&y).unwrap(), m, "trial {i}");
    }
}

#[test]
fn beyond_radius_is_never_silent_when_detected() {
    let c = GabidulinCode::new(&Field::gf16(), 8, 8, 4).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    for _ in 0..30 {
        let m = random_message(&c, &mut r);
        let cw = c.encode(&m).unwrap();
        let y = add(c.ext(), &cw, &rank_error(c.ext(), 8, 4, &mut r));
        match c.decode(&y) {
            Err(Error::DecodeFailure) => failures += 1,
            Ok(got) => assert!(c.rank_distance(&c.encode(&got).unwrap(), &y) <= c.radius()),
            Err(e) => panic!("{e}"),
        }
    }
    assert!(failures > 0);
}

#[test]
fn concatenated_code_shape() {
    let code = fig5_code();
    assert_eq!(code.file_size(), 15 * 5 * 25);
    assert_eq!(code.systematic_nodes(), vec![0, 1, 2, 3, 4]);
    assert_eq!(code.rate(), Rational64::new(75, 250));
    assert!(!code.meets_cutset());
    let zero = code.encode(&vec![0; code.file_size()]).unwrap();
    assert!(zero.iter().flatten().all(|x| code.outer().ext().is_zero(x)));
    assert!(matches!(code.encode(&[0; 3]), Err(Error::Length { .. })));
}

#[test]
fn systematic_nodes_hold_outer_codewords() {
    let code = fig5_code();
    let base = Field::gf256();
    let mut r = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let file: Vec<u32> = (0..code.file_size()).map(|_| base.random(&mut r)).collect();
        let cw = code.encode(&file).unwrap();
        let per_block = 15 * 25;
        for i in code.systematic_nodes() {
            let msg = code.outer().decode(&cw[i]).unwrap();
            assert_eq!(code.outer().encode(&msg).unwrap(), cw[i]);
            let flat: Vec<u32> = msg.iter().flat_map(|x| x.coords().to_vec()).collect();
            assert_eq!(flat, file[i * per_block..(i + 1) * per_block]);
            assert_eq!(code.node_rows(&cw[i]).len(), 25);
        }
    }
}

#[test]
fn retrieval_from_systematic_and_other_nodes() {
    let code = fig5_code();
    let base = Field::gf256();
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let file: Vec<u32> = (0..code.file_size()).map(|_| base.random(&mut r)).collect();
    let cw = code.encode(&file).unwrap();
    let sys: Vec<(usize, Vec<TowerElement>)> = (0..5).map(|i| (i, cw[i].clone())).collect();
    assert_eq!(code.reconstruct(&sys).unwrap(), file);
    assert_eq!(code.retrieval_cost(&[0, 1, 2, 3, 4]), 5 * 15 * 25);
    let other: Vec<(usize, Vec<TowerElement>)> = [1, 3, 6, 8, 9].iter().map(|&i| (i, cw[i].clone())).collect();
    assert_eq!(code.reconstruct(&other).unwrap(), file);
    assert_eq!(code.retrieval_cost(&[1, 3, 6, 8, 9]), 5 * 25 * 25);
}

#[test]
fn fig5_repair_with_one_altered_helper() {
    let code = fig5_code();
    let g = StorageGraph::fig5();
    let setup = code.repair_setup(&g, 0, &(1..10).collect::<Vec<_>>()).unwrap();
    let base = Field::gf256();
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let file: Vec<u32> = (0..code.file_size()).map(|_| base.random(&mut r)).collect();
    let cw = code.encode(&file).unwrap();
    let ext = code.outer().ext();
    let z: Vec<TowerElement> = (0..25).map(|_| ext.random(&mut r)).collect();
    let adv = AdversaryModel::new(1, vec![(3, z)]).unwrap();
    let out = adversarial_repair(code, &setup, &cw, &adv, Scheme::IpUniform).unwrap();
    assert_eq!(out.content, cw[0]);
    assert_eq!(out.report.total, Rational64::from(85));
    assert_eq!(out.report.edge(1), Some(Rational64::from(25)));
    assert_eq!(out.rank_budget, 5);
    assert_eq!(out.omega, 5);
    assert!(out.error_rank >= 1 && out.error_rank <= 5);
    let clean = adversarial_repair(code, &setup, &cw, &AdversaryModel::none(), Scheme::IpUniform).unwrap();
    assert_eq!((clean.content == cw[0], clean.error_rank), (true, 0));
}

#[test]
fn error_rank_stays_within_budget() {
    let code = fig5_code();
    let g = StorageGraph::fig5();
    let setup = code.repair_setup(&g, 0, &(1..10).collect::<Vec<_>>()).unwrap();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let logs = adversarial_trials(code, &setup, 1, Scheme::IpUniform, 100, 11, exec).unwrap();
        assert_eq!(logs.len(), 100);
        for log in &logs {
            assert!(log.success);
            assert!(log.error_rank <= log.rank_budget && log.rank_budget <= 5);
            assert_eq!(log.total, "85");
            assert_eq!(log.corrupted.len(), 1);
        }
        let text = serde_json::to_string(&logs[0]).unwrap();
        assert_eq!(serde_json::from_str::<TrialLog>(&text).unwrap(), logs[0]);
        if exec == Execution::Parallel {
            let seq = adversarial_trials(code, &setup, 1, Scheme::IpUniform, 100, 11, Execution::Sequential).unwrap();
            assert_eq!(seq, logs);
        }
    }
}

#[test]
fn too_many_altered_helpers() {
    let code = fig5_code();
    let g = StorageGraph::fig5();
    let setup = code.repair_setup(&g, 0, &(1..10).collect::<Vec<_>>()).unwrap();
    let cw = code.encode(&vec![0; code.file_size()]).unwrap();
    let ext = code.outer().ext();
    let z = vec![ext.one(); 25];
    let adv = AdversaryModel::new(2, vec![(3, z.clone()), (5, z.clone())]).unwrap();
    assert_eq!(
        adversarial_repair(code, &setup, &cw, &adv, Scheme::IpUniform),
        Err(Error::RadiusExceeded { slack: 10, omega: 10 })
    );
    assert!(AdversaryModel::new(1, vec![(3, z.clone()), (5, z.clone())]).is_err());
    assert!(code.repair_setup(&g, 7, &[0, 1, 2, 3, 4, 5, 6, 8, 9]).is_err());
}

#[test]
fn af_baseline_totals() {
    let g = StorageGraph::fig5();
    assert_eq!(af_with_extra_helpers_baseline(&g, 0, 5, 7, 15, 1).unwrap().total, Rational64::from(95));
    let plain = af_with_extra_helpers_baseline(&g, 0, 5, 7, 15, 0).unwrap().total;
    assert_eq!(plain, Rational64::from(5 * (1 + 1 + 1 + 2 + 2 + 3 + 3)));
    let star = StorageGraph::star(12);
    assert_eq!(af_with_extra_helpers_baseline(&star, 0, 3, 6, 8, 2).unwrap().total, Rational64::from(10 * 2));
    assert!(af_with_extra_helpers_baseline(&g, 0, 5, 7, 15, 2).is_err());
}
