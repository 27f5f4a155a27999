use std::sync::Arc;

use grc::codes::*;
use grc::gf::{Field, FieldOps, Matrix};
use grc::util::combinations;
use grc::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn pm_zero_file_and_linearity() {
    let code = PmCode::new(&Field::gf256(), 7, 4).unwrap();
    let zero = code.encode(&[0; 12]).unwrap();
    assert!(zero.iter().flatten().all(|&x| x == 0));
    let f = code.field().clone();
    let mut r = rng(1);
    for _ in 0..20 {
        let a = random_file(&code, &mut r);
        let b = random_file(&code, &mut r);
        let s: Vec<u32> = a.iter().zip(&b).map(|(x, y)| f.add(x, y)).collect();
        let ea = code.encode(&a).unwrap();
        let eb = code.encode(&b).unwrap();
        let es = code.encode(&s).unwrap();
        for i in 0..7 {
            for j in 0..3 {
                assert_eq!(es[i][j], f.add(&ea[i][j], &eb[i][j]));
            }
        }
    }
    assert_eq!(code.encode(&[1, 2, 3]), Err(Error::Length { expected: 12, got: 3 }));
}

#[test]
fn pm_node_content_matches_polynomial_definition() {
    // g_i(z) = s_1(a_i, z) + a_i^{k-1} s_2(a_i, z), evaluated directly from the packed file
    let fld = Field::gf256();
    let code = PmCode::new(&fld, 7, 4).unwrap();
    let mut r = rng(2);
    let file = random_file(&code, &mut r);
    let w = 3;
    let mut idx = 0;
    let mut s1 = vec![vec![0u32; w]; w];
    let mut s2 = vec![vec![0u32; w]; w];
    for s in [&mut s1, &mut s2] {
        for p in 0..w {
            for q in p..w {
                s[p][q] = file[idx];
                s[q][p] = file[idx];
                idx += 1;
            }
        }
    }
    let cw = code.encode(&file).unwrap();
    for (i, &a) in code.points().iter().enumerate() {
        let lam = fld.pow(a, 3);
        for q in 0..w {
            let mut v = 0;
            for p in 0..w {
                let ap = fld.pow(a, p as u64);
                v = fld.add(&v, &fld.mul(&ap, &s1[p][q]));
                v = fld.add(&v, &fld.mul(&lam, &fld.mul(&ap, &s2[p][q])));
            }
            assert_eq!(cw[i][q], v);
        }
    }
}

#[test]
fn pm_reconstruct_every_subset_k3_n6() {
    let code = PmCode::new(&Field::gf256(), 6, 3).unwrap();
    let gens = Generators::of(&code).unwrap();
    let mut r = rng(3);
    for _ in 0..5 {
        let file = random_file(&code, &mut r);
        let cw = code.encode(&file).unwrap();
        for s in combinations(6, 3) {
            let nodes: Vec<(usize, Vec<u32>)> = s.iter().map(|&i| (i, cw[i].clone())).collect();
            assert_eq!(reconstruct(&code, &gens, &nodes).unwrap(), file);
            let mut bad = nodes.clone();
            bad[0].1[0] ^= 1;
            assert_ne!(reconstruct(&code, &gens, &bad).unwrap(), file);
        }
    }
    let zero = code.encode(&[0; 6]).unwrap();
    let nodes: Vec<(usize, Vec<u32>)> = (0..3).map(|i| (i, zero[i].clone())).collect();
    assert_eq!(reconstruct(&code, &gens, &nodes).unwrap(), vec![0; 6]);
    assert!(reconstruct(&code, &gens, &nodes[..2]).is_err());
    let dup = vec![nodes[0].clone(), nodes[0].clone(), nodes[1].clone()];
    assert_eq!(reconstruct(&code, &gens, &dup), Err(Error::Duplicate(0)));
}

#[test]
fn pm_af_and_ip_repair_exhaustive_k3_n6() {
    let code = PmCode::new(&Field::gf256(), 6, 3).unwrap();
    let fld = code.field().clone();
    let mut r = rng(4);
    for _ in 0..3 {
        let file = random_file(&code, &mut r);
        let cw = code.encode(&file).unwrap();
        for f in 0..6 {
            let others: Vec<usize> = (0..6).filter(|&x| x != f).collect();
            for pick in combinations(5, 4) {
                let helpers: Vec<usize> = pick.iter().map(|&i| others[i]).collect();
                let syms: Vec<(usize, u32)> =
                    helpers.iter().map(|&h| (h, code.helper_symbol(&cw[h], h, f).unwrap())).collect();
                assert_eq!(code.af_repair(f, &syms).unwrap(), cw[f]);
                assert_eq!(code.ip_combine(None, &syms, f, &helpers).unwrap(), cw[f]);
                // additivity over a split of the helper set
                let (a1, a2) = syms.split_at(2);
                let x1 = code.ip_combine(None, a1, f, &helpers).unwrap();
                let x12 = code.ip_combine(Some(&x1), a2, f, &helpers).unwrap();
                assert_eq!(x12, cw[f]);
                let mut bad = syms.clone();
                bad[1].1 = fld.add(&bad[1].1, &1);
                assert_ne!(code.af_repair(f, &bad).unwrap(), cw[f]);
            }
        }
    }
}

#[test]
fn pm_repair_errors() {
    let code = PmCode::new(&Field::gf256(), 7, 4).unwrap();
    let cw = code.encode(&[0; 12]).unwrap();
    assert_eq!(code.helper_symbol(&cw[2], 2, 2), Err(Error::HelperIsFailed(2)));
    assert_eq!(code.helper_symbol(&cw[2], 2, 3).unwrap(), 0);
    let syms: Vec<(usize, u32)> = (1..7).map(|h| (h, 0)).collect();
    assert!(code.af_repair(0, &syms[..5]).is_err());
    let mut dup = syms.clone();
    dup[1].0 = 1;
    assert_eq!(code.af_repair(0, &dup), Err(Error::Duplicate(1)));
    let helpers: Vec<usize> = (1..7).collect();
    assert_eq!(code.ip_combine(None, &[], 0, &helpers).unwrap(), vec![0; 3]);
    assert_eq!(code.ip_combine(None, &[(0, 1)], 2, &[0, 2, 3, 4, 5, 6]), Err(Error::HelperIsFailed(2)));
    assert_eq!(code.ip_combine(None, &[(0, 1)], 0, &helpers), Err(Error::NotAHelper(0)));
}

#[test]
fn derived_matrices_agree_with_lagrange_on_every_subset() {
    let code = PmCode::new(&Field::gf256(), 7, 4).unwrap();
    let gens = Generators::of(&code).unwrap();
    let f = 0;
    let helpers: Vec<usize> = (1..7).collect();
    let set = derive_ip_matrices(&code, &gens, f, &helpers, &nearest_first_ranks(6)).unwrap();
    let fld = code.field().clone();
    let mut r = rng(5);
    for _ in 0..30 {
        let cw = code.encode(&random_file(&code, &mut r)).unwrap();
        for size in 0..=6 {
            for a in combinations(6, size) {
                let sub: Vec<usize> = a.iter().map(|&i| helpers[i]).collect();
                let derived_syms: Vec<(usize, Vec<u32>)> =
                    sub.iter().map(|&h| (h, set.helper_symbols(&fld, h, &cw[h]).unwrap())).collect();
                let derived = set.combine(&fld, &derived_syms).unwrap();
                let closed_syms: Vec<(usize, u32)> =
                    sub.iter().map(|&h| (h, code.helper_symbol(&cw[h], h, f).unwrap())).collect();
                let closed = code.ip_combine(None, &closed_syms, f, &helpers).unwrap();
                assert_eq!(derived, closed);
            }
        }
    }
}

#[test]
fn pm_exact_d_required() {
    // only d = 2(k-1) is product-matrix; larger d goes through shortening
    let fld = Field::gf256();
    assert!(unit_msr(&fld, 10, 5, 8).is_ok());
    let sh = unit_msr(&fld, 10, 5, 9).unwrap();
    assert_eq!((sh.d(), sh.node_size(), sh.file_size()), (9, 5, 25));
    assert!(matches!(unit_msr(&fld, 10, 5, 6), Err(Error::Unrealizable { .. })));
}

#[test]
fn shortened_code_repairs_and_reconstructs() {
    let fld = Field::gf256();
    let code = ShortenedPmCode::new(&fld, 7, 3, 5).unwrap();
    assert_eq!(code.shift(), 1);
    assert_eq!((code.node_size(), code.file_size()), (3, 9));
    let gens = Generators::of(&code).unwrap();
    let mut r = rng(6);
    let file = random_file(&code, &mut r);
    let cw = code.encode(&file).unwrap();
    for s in combinations(7, 3) {
        let nodes: Vec<(usize, Vec<u32>)> = s.iter().map(|&i| (i, cw[i].clone())).collect();
        assert_eq!(reconstruct(&code, &gens, &nodes).unwrap(), file);
    }
    for f in 0..7 {
        let others: Vec<usize> = (0..7).filter(|&x| x != f).collect();
        for pick in combinations(6, 5) {
            let helpers: Vec<usize> = pick.iter().map(|&i| others[i]).collect();
            let set = derive_ip_matrices(&code, &gens, f, &helpers, &nearest_first_ranks(5)).unwrap();
            let syms: Vec<(usize, Vec<u32>)> =
                helpers.iter().map(|&h| (h, set.helper_symbols(&fld, h, &cw[h]).unwrap())).collect();
            assert_eq!(set.combine(&fld, &syms).unwrap(), cw[f]);
        }
    }
}

#[test]
fn systematic_form_stores_the_file() {
    let fld = Field::gf256();
    let inner: Arc<dyn LinearRegeneratingCode> = Arc::new(PmCode::new(&fld, 7, 4).unwrap());
    let code = SystematicCode::new(inner).unwrap();
    let mut r = rng(7);
    let file = random_file(&code, &mut r);
    let cw = code.encode(&file).unwrap();
    for i in 0..4 {
        assert_eq!(cw[i], file[3 * i..3 * i + 3].to_vec());
    }
}

#[test]
fn gpm_example_parameters() {
    let code = GpmCode::example_7_5_3().unwrap();
    assert_eq!(
        (code.n(), code.k(), code.d(), code.node_size(), code.beta(), code.file_size()),
        (7, 5, 6, 6, 3, 30)
    );
    assert_eq!(code.field().order(), 16);
    // β = l / (d - k + 1)
    assert_eq!(code.beta() * (code.d() - code.k() + 1), code.node_size());
    let zero = code.encode(&[0; 30]).unwrap();
    assert!(zero.iter().flatten().all(|&x| x == 0));
}

#[test]
fn gpm_example_repair_of_first_node() {
    let code = GpmCode::example_7_5_3().unwrap();
    let fld = code.field().clone();
    let f = 0;
    let helpers: Vec<usize> = (1..7).collect();
    let coeffs = code.ip_coefficients(f, &helpers).unwrap();
    let gens = Generators::of(&code).unwrap();
    let set = derive_ip_matrices(&code, &gens, f, &helpers, &nearest_first_ranks(6)).unwrap();
    let mut r = rng(8);
    for _ in 0..100 {
        let cw = code.encode(&random_file(&code, &mut r)).unwrap();
        let syms: Vec<(usize, Vec<u32>)> =
            helpers.iter().map(|&h| (h, code.helper_symbols(&cw[h], h, f).unwrap())).collect();
        assert!(syms.iter().all(|(_, s)| s.len() == 3));
        assert_eq!(code.ip_combine(&coeffs, &helpers, &syms).unwrap(), cw[f]);
        assert_eq!(set.combine(&fld, &syms).unwrap(), cw[f]);
        // a three-helper group sends one 6-symbol combination instead of 9 raw symbols
        let group = [1usize, 3, 4];
        let part: Vec<(usize, Vec<u32>)> = syms.iter().filter(|(h, _)| group.contains(h)).cloned().collect();
        let rest: Vec<(usize, Vec<u32>)> = syms.iter().filter(|(h, _)| !group.contains(h)).cloned().collect();
        let xi = code.ip_combine(&coeffs, &helpers, &part).unwrap();
        assert_eq!(xi.len(), 6);
        assert_eq!(part.iter().map(|(_, s)| s.len()).sum::<usize>(), 9);
        let x2 = code.ip_combine(&coeffs, &helpers, &rest).unwrap();
        let total: Vec<u32> = xi.iter().zip(&x2).map(|(a, b)| fld.add(a, b)).collect();
        assert_eq!(total, cw[f]);
    }
}

#[test]
fn gpm_with_t2_is_the_product_matrix_code() {
    let fld = Field::gf256();
    let k = 4;
    let pm = PmCode::new(&fld, 7, k).unwrap();
    let pts = pm.points().to_vec();
    let gpm = GpmCode::moment_curve(&fld, k, 2, &pts, &[0, (k - 1) as u64], &[0, 1, 2]).unwrap();
    assert_eq!(gpm.file_size(), k * (k - 1));
    assert_eq!(gpm.d(), pm.d());
    let mut r = rng(9);
    for _ in 0..20 {
        let file = random_file(&pm, &mut r);
        let a = pm.encode(&file).unwrap();
        let b = gpm.encode(&file).unwrap();
        assert_eq!(a, b);
        for h in 1..7 {
            let s = gpm.helper_symbols(&b[h], h, 0).unwrap();
            assert_eq!(s, vec![pm.helper_symbol(&a[h], h, 0).unwrap()]);
        }
    }
}

#[test]
fn gpm_rejects_degenerate_points() {
    let fld = Field::gf16();
    // repeated point breaks the x-subset condition
    let pts = [1u32, 2, 4, 8, 3, 6, 6];
    assert!(GpmCode::moment_curve(&fld, 5, 3, &pts, &[0, 2, 6], &[0, 1, 3]).is_err());
    assert!(GpmCode::moment_curve(&fld, 5, 4, &pts[..6], &[0, 1, 2, 3], &[0, 1]).is_err());
}

#[test]
fn derive_fails_when_helpers_are_insufficient() {
    let fld = Field::gf256();
    let code = PmCode::new(&fld, 7, 4).unwrap();
    let gens = Generators::of(&code).unwrap();
    // the repair map of a rank is fine, but replacing a helper by the failed node is refused
    assert!(derive_ip_matrices(&code, &gens, 0, &[0, 1, 2, 3, 4, 5], &nearest_first_ranks(6)).is_err());
    assert!(matches!(
        derive_ip_matrices(&code, &gens, 0, &[1, 2, 3, 4, 5, 6], &[1, 1, 2, 3, 4, 5]),
        Err(Error::BadAssignment(_))
    ));
    let target = Matrix::identity(&fld, 3);
    let weak = vec![Matrix::from_vec(1, 3, vec![1, 0, 0])];
    assert!(solve_combination(&fld, &weak, &target).is_err());
}
