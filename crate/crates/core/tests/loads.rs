use cdc_core::analytics::{
    self, l_cdc, l_cdc_ld, l_cdc_ld_derived, l_cdc_ld_s1, l_cdc_s1, l_uncoded, ratio, LoadReport,
};
use cdc_core::placement::binomial;
use cdc_core::workloads::{SyntheticRankWorkload, WordCountWorkload};
use cdc_core::{run, JobSpec, Scheme, Workload};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `N` divisible by every `C(K, r)`.
fn lcm_files(k: usize) -> usize {
    (1..=k).map(|r| binomial(k, r)).fold(1, |a, b| a / gcd(a, b) * b) as usize
}

#[test]
fn s1_empirical_loads_equal_closed_forms() {
    // T = 60 splits evenly into r segments for every r <= 5
    for k in 3..=5 {
        let n = lcm_files(k);
        for r in 1..=k {
            let spec = JobSpec::new(k, n, k, r, 1, 60).unwrap();
            let w = Workload::Synthetic(SyntheticRankWorkload::new((k * 10 + r) as u64, 0.6).unwrap());
            let unc = run(&spec, &w, Scheme::Uncoded).unwrap();
            let cdc = run(&spec, &w, Scheme::Cdc).unwrap();
            let ld = run(&spec, &w, Scheme::CdcLd).unwrap();
            assert_eq!(unc.load, l_uncoded(r, k));
            assert_eq!(cdc.load, l_cdc_s1(r, k));
            let rho = ld.average_ranks().get(&(r + 1)).cloned().unwrap_or_default();
            assert_eq!(ld.load, l_cdc_ld_s1(r, k, k, n, 60, &rho), "K={k} r={r}");
            for res in [&unc, &cdc, &ld] {
                assert!(res.verification.is_pass());
                let rep = LoadReport::from_run(res);
                assert!(rep.analytic.iter().all(|a| a.exact));
            }
        }
    }
}

#[test]
fn example_wordcount_costs_across_t() {
    let w = Workload::WordCount(WordCountWorkload::example());
    for t in [4, 6, 12, 14, 30, 64] {
        let spec = JobSpec::new(4, 6, 4, 2, 1, t).unwrap();
        let cdc = run(&spec, &w, Scheme::Cdc).unwrap();
        let ld = run(&spec, &w, Scheme::CdcLd).unwrap();
        assert_eq!(cdc.bits_per_node[0], 3 * t as u64 / 2);
        let rho1 = ld.ranks.iter().find(|e| e.node == 1).unwrap().rank;
        assert_eq!(rho1, 2, "T={t}");
        assert_eq!(ld.bits_per_node[0], t as u64 + 6);
    }
}

#[test]
fn general_s_counts_match_the_scaled_reading() {
    // segment lengths divide evenly and fit whole field symbols
    for (k, n, q, r, s, t) in [(4, 6, 6, 2, 2, 8), (5, 10, 10, 2, 2, 12), (5, 10, 10, 3, 2, 36), (5, 5, 10, 1, 3, 6)] {
        let spec = JobSpec::new(k, n, q, r, s, t).unwrap();
        let w = Workload::Synthetic(SyntheticRankWorkload::new(9, 0.3).unwrap());
        let cdc = run(&spec, &w, Scheme::Cdc).unwrap();
        assert_eq!(cdc.load, l_cdc(r, s, k), "{spec:?}");
        let ld = run(&spec, &w, Scheme::CdcLd).unwrap();
        let rho = ld.average_ranks();
        assert_eq!(ld.load, l_cdc_ld_derived(&spec, &rho), "{spec:?}");
        assert_ne!(ld.load, l_cdc_ld(&spec, &rho));
        let rep = LoadReport::from_run(&ld);
        assert!(rep.any_exact());
        assert!(rep.flag.is_some());
        assert_eq!(rep.scale_factor, Some(analytics::scale_factor(k, s)));
        assert_eq!(ld.coverage_ok, Some(true));
    }
}

#[test]
fn padded_segments_cost_more_than_the_formula() {
    // T = 7 does not split into r = 2 halves
    let spec = JobSpec::new(4, 6, 4, 2, 1, 7).unwrap();
    let w = Workload::Synthetic(SyntheticRankWorkload::new(2, 0.0).unwrap());
    let res = run(&spec, &w, Scheme::Cdc).unwrap();
    assert!(res.load > l_cdc_s1(2, 4));
    assert!(res.verification.is_pass());
}

#[test]
fn eq8_matches_its_s1_form() {
    for k in 2..=12 {
        for r in 1..k {
            assert_eq!(l_cdc(r, 1, k), ratio(1, r as i64) * (ratio(1, 1) - ratio(r as i64, k as i64)));
        }
    }
}
