use grc::bounds::delta_r;
use grc::codes::{derive_ip_matrices, nearest_first_ranks, random_file, reconstruct, Generators, LinearRegeneratingCode};
use grc::gf::Field;
use grc::stacking::{build_stack, StackSpec, StackedCode};
use grc::util::combinations;
use grc::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small() -> StackedCode {
    StackedCode::build(&Field::gf256(), 5, 2, 4, &[1, 1, 2, 2]).unwrap()
}

#[test]
fn zero_file_and_node_size() {
    let code = small();
    assert_eq!(code.node_size(), code.spec().components.iter().map(|c| c.l).sum::<usize>());
    let cw = code.encode(&[0; 8]).unwrap();
    assert!(cw.iter().flatten().all(|&x| x == 0));
    assert_eq!(code.encode(&[0; 7]), Err(Error::Length { expected: 8, got: 7 }));
}

#[test]
fn slices_are_component_codewords() {
    let code = small();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let file = random_file(&code, &mut r);
    let cw = code.encode(&file).unwrap();
    for (ci, c) in code.spec().components.iter().enumerate() {
        let unit = &code.units()[ci];
        for q in 0..c.copies {
            let fs = c.file_offset + q * 2 * c.unit_l;
            let expect = unit.encode(&file[fs..fs + 2 * c.unit_l]).unwrap();
            let ns = c.node_offset + q * c.unit_l;
            for i in 0..5 {
                assert_eq!(cw[i][ns..ns + c.unit_l], expect[i][..]);
            }
        }
    }
}

#[test]
fn round_trip_every_k_subset() {
    let code = small();
    let gens = Generators::of(&code).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let file = random_file(&code, &mut r);
        let cw = code.encode(&file).unwrap();
        for s in combinations(5, 2) {
            let nodes: Vec<(usize, Vec<u32>)> = s.iter().map(|&i| (i, cw[i].clone())).collect();
            assert_eq!(code.reconstruct_stack(&nodes).unwrap(), file);
            assert_eq!(reconstruct(&code, &gens, &nodes).unwrap(), file);
        }
    }
}

#[test]
fn download_profile_follows_the_assignment() {
    let code = small();
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let cw = code.encode(&random_file(&code, &mut r)).unwrap();
    let helpers = [1, 2, 3, 4];
    let a = code.repair(&cw, 0, &helpers, &[1, 2, 3, 4]).unwrap();
    assert_eq!(a.content, cw[0]);
    assert_eq!(a.downloads, vec![1, 1, 2, 2]);
    let b = code.repair(&cw, 0, &helpers, &[4, 3, 2, 1]).unwrap();
    assert_eq!(b.content, cw[0]);
    assert_eq!(b.downloads, vec![2, 2, 1, 1]);
    assert!(matches!(code.repair(&cw, 0, &helpers, &[1, 1, 2, 3]), Err(Error::BadAssignment(_))));
    assert!(code.repair(&cw, 0, &helpers[..3], &[1, 2, 3]).is_err());
}

#[test]
fn uniform_downloads_send_beta_each() {
    let code = StackedCode::build(&Field::gf256(), 7, 3, 5, &[2; 5]).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let cw = code.encode(&random_file(&code, &mut r)).unwrap();
    let out = code.repair(&cw, 6, &[0, 1, 2, 3, 4], &nearest_first_ranks(5)).unwrap();
    assert_eq!(out.content, cw[6]);
    assert_eq!(out.downloads, vec![2; 5]);
}

#[test]
fn ip_subsets_compress_to_node_size() {
    let code = small();
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let cw = code.encode(&random_file(&code, &mut r)).unwrap();
    let helpers = [1, 2, 3, 4];
    let ranks = [4, 3, 2, 1];
    for size in 0..=4 {
        for a in combinations(4, size) {
            let subset: Vec<usize> = a.iter().map(|&i| helpers[i]).collect();
            let out = code.ip_repair(&cw, 0, &helpers, &ranks, &subset).unwrap();
            assert_eq!(out.content, cw[0]);
            let raw: usize = a.iter().map(|&i| code.spec().sends(ranks[i])).sum();
            if size >= 3 {
                assert!(out.compressed);
                assert_eq!(out.subset_symbols, 4);
                assert!(out.subset_symbols <= raw);
            } else {
                assert!(!out.compressed);
                assert_eq!(out.subset_symbols, raw);
            }
        }
    }
    let all = code.ip_repair(&cw, 0, &helpers, &ranks, &helpers).unwrap();
    assert_eq!(all.total_symbols, 4);
    assert!(all.total_symbols < 6);
    assert_eq!(code.ip_repair(&cw, 0, &helpers, &ranks, &[0]), Err(Error::NotAHelper(0)));
}

#[test]
fn assembled_matrices_match_generic_derivation() {
    let fld = Field::gf256();
    let code = StackedCode::build(&fld, 6, 2, 5, &[1, 2, 2, 3, 3]).unwrap();
    let gens = Generators::of(&code).unwrap();
    let helpers = [0, 2, 3, 4, 5];
    let ranks = [2, 5, 1, 3, 4];
    let generic = derive_ip_matrices(&code, &gens, 1, &helpers, &ranks).unwrap();
    let assembled = code.ip_matrices(1, &helpers, &ranks).unwrap();
    assert_eq!(generic.repair_maps, assembled.repair_maps);
    let mut r = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let cw = code.encode(&random_file(&code, &mut r)).unwrap();
        for set in [&generic, &assembled] {
            let syms: Vec<(usize, Vec<u32>)> =
                helpers.iter().map(|&h| (h, set.helper_symbols(&fld, h, &cw[h]).unwrap())).collect();
            assert_eq!(set.combine(&fld, &syms).unwrap(), cw[1]);
        }
    }
}

fn random_sorted_betas(r: &mut ChaCha8Rng, d: usize) -> Vec<u64> {
    let mut b: Vec<u64> = (0..d).map(|_| r.random_range(0..4)).collect();
    b.sort_unstable();
    if b[..].iter().all(|&x| x == 0) {
        b[d - 1] = 1;
    }
    b
}

#[test]
fn every_failure_every_helper_set_two_assignments() {
    // k = 2 keeps every component degree at least 2(k-1), so all draws are realizable
    let fld = Field::gf256();
    let mut r = ChaCha8Rng::seed_from_u64(7);
    for d in 2..=6 {
        for n in d + 1..=7 {
            let mut b = random_sorted_betas(&mut r, d);
            if b[..d - 1].iter().all(|&x| x == 0) {
                b[0] = 1;
                b.sort_unstable();
            }
            let code = StackedCode::build(&fld, n, 2, d, &b).unwrap();
            assert_eq!(code.node_size() as u64, delta_r(&b, d - 1).unwrap());
            let cw = code.encode(&random_file(&code, &mut r)).unwrap();
            for f in 0..n {
                let others: Vec<usize> = (0..n).filter(|&x| x != f).collect();
                for pick in combinations(others.len(), d) {
                    let helpers: Vec<usize> = pick.iter().map(|&i| others[i]).collect();
                    let near = nearest_first_ranks(d);
                    let far: Vec<usize> = (1..=d).collect();
                    for ranks in [near, far] {
                        let out = code.repair(&cw, f, &helpers, &ranks).unwrap();
                        assert_eq!(out.content, cw[f]);
                        let expect: Vec<usize> = ranks.iter().map(|&j| code.spec().sends(j)).collect();
                        assert_eq!(out.downloads, expect);
                    }
                }
            }
        }
    }
}

#[test]
fn unrealizable_gap_is_reported() {
    let err = build_stack(7, 3, 6, &[1, 1, 1, 2, 2, 2]).unwrap_err();
    assert_eq!(err, Error::Unrealizable { component: 4, k: 3, d: 3 });
    assert!(StackedCode::build(&Field::gf256(), 7, 3, 6, &[1, 1, 1, 2, 2, 2]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn node_size_is_msr(k in 1usize..6, r in 1usize..=8, extra in 0usize..3, raw in proptest::collection::vec(0u64..6, 16)) {
        let d = k + r - 1;
        let n = d + 1 + extra;
        let mut b = raw[..d].to_vec();
        b.sort_unstable();
        prop_assume!(b[..r].iter().any(|&x| x > 0));
        let s = StackSpec::plan(n, k, d, &b).unwrap();
        prop_assert_eq!(s.l as u64, delta_r(&b, r).unwrap());
        prop_assert_eq!(s.m, k * s.l);
        prop_assert_eq!(s.components.iter().map(|c| c.m).sum::<usize>(), s.m);
        for (c, &j) in s.components.iter().zip(&s.s) {
            prop_assert_eq!(c.j, j);
            prop_assert_eq!(s.mu[j - 1], 1);
        }
        let eff = s.effective_betas();
        for j in 0..d {
            prop_assert!(eff[j] <= b[j]);
            if j < r {
                prop_assert_eq!(eff[j], b[j]);
            }
        }
    }
}
