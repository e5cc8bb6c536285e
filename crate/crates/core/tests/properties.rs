mod common;

use common::{algebraic, bernoulli, digit_pair, golden, rational_pair};
use ifsdim::bounds::{assemble_verdict, chain_holds, VerdictInputs};
use ifsdim::exactalg::{FieldElement, LaurentPoly, NumberField, Rational};
use ifsdim::ifs::{entropy_h, lyapunov_exact, validate, AffineMap};
use ifsdim::sampler::{sample_stationary, SampleOptions};
use ifsdim::semigroup::{expand_level, growth_series, GrowthOptions, SemigroupLevel, DEFAULT_BUDGET};
use proptest::prelude::*;

fn fields() -> Vec<NumberField> {
    vec![golden(), algebraic(&[-1, -1, -1, 1], 1, 2), algebraic(&[-2, 0, 1], 1, 2), NumberField::formal(2.5).unwrap()]
}

fn element() -> impl Strategy<Value = (i32, Vec<i64>)> {
    (-3i32..3, prop::collection::vec(-6i64..7, 1..4))
}

fn build(f: &NumberField, (low, c): &(i32, Vec<i64>)) -> FieldElement {
    f.reduce(&LaurentPoly::from_ints(*low, c)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(fi in 0usize..4, a in element(), b in element(), c in element()) {
        let f = &fields()[fi];
        let (a, b, c) = (build(f, &a), build(f, &b), build(f, &c));
        prop_assert!(f.equal(&f.add(&f.add(&a, &b).unwrap(), &c).unwrap(), &f.add(&a, &f.add(&b, &c).unwrap()).unwrap()).unwrap());
        prop_assert!(f.equal(&f.mul(&a, &b).unwrap(), &f.mul(&b, &a).unwrap()).unwrap());
        let lhs = f.mul(&a, &f.add(&b, &c).unwrap()).unwrap();
        let rhs = f.add(&f.mul(&a, &b).unwrap(), &f.mul(&a, &c).unwrap()).unwrap();
        prop_assert!(f.equal(&lhs, &rhs).unwrap());
        prop_assert!(f.is_zero(&f.sub(&a, &a).unwrap()));
        if !f.is_zero(&a) {
            if let Ok(inv) = f.inv(&a) {
                prop_assert!(f.equal(&f.mul(&a, &inv).unwrap(), &f.one()).unwrap());
            }
        }
    }

    #[test]
    fn reduction_is_idempotent(fi in 0usize..3, a in element()) {
        let f = &fields()[fi];
        let x = build(f, &a);
        let again = match &x {
            FieldElement::Algebraic(c) => f.reduce(&LaurentPoly { low: 0, coeffs: c.clone() }).unwrap(),
            FieldElement::Rational(r) => f.reduce(&LaurentPoly { low: 0, coeffs: vec![r.clone()] }).unwrap(),
            FieldElement::Laurent(_) => unreachable!(),
        };
        prop_assert_eq!(x, again);
    }

    #[test]
    fn reduction_preserves_value(fi in 0usize..3, a in element()) {
        let f = &fields()[fi];
        let lam = f.lambda_f64().unwrap();
        let (low, c) = &a;
        let naive: f64 = c.iter().enumerate().map(|(k, &x)| x as f64 * lam.powi(*low + k as i32)).sum();
        let got = f.to_f64(&build(f, &a));
        prop_assert!((got - naive).abs() <= 1e-9 * (1.0 + naive.abs()), "{} vs {}", got, naive);
    }

    #[test]
    fn composition_is_associative(
        e in prop::collection::vec((-5i64..6, 1i64..5), 18),
    ) {
        let f = NumberField::rational();
        let r = |i: usize| FieldElement::Rational(Rational::new(e[i].0, e[i].1));
        let map = |o: usize| AffineMap::new(
            vec![vec![r(o), r(o + 1)], vec![r(o + 2), r(o + 3)]],
            vec![r(o + 4), r(o + 5)],
        ).unwrap();
        let (a, b, c) = (map(0), map(6), map(12));
        let left = a.compose(&b, &f).unwrap().compose(&c, &f).unwrap();
        let right = a.compose(&b.compose(&c, &f).unwrap(), &f).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn level_invariants(
        fi in 0usize..2,
        p in 1i64..16,
        depth in 4usize..9,
    ) {
        let f = &fields()[fi];
        let probs = vec![Rational::new(p, 16), Rational::new(16 - p, 16)];
        let s = bernoulli(f, Some(probs.clone()));
        let h = entropy_h(&probs);
        let mut level = SemigroupLevel::root(&s);
        let mut d = vec![1u64];
        let mut hs = vec![(0.0, 0.0)];
        for n in 1..=depth {
            level = expand_level(&level, &s, DEFAULT_BUDGET, false).unwrap();
            prop_assert!(level.total_mass().is_one(), "mass at level {}", n);
            d.push(level.d() as u64);
            let (hn, e) = level.entropy();
            hs.push((hn, e));
            // H_n ≤ min(log d_n, −n h)
            prop_assert!(hn - e <= (level.d() as f64).ln() + 1e-12);
            prop_assert!(hn - e <= n as f64 * (-h).hi + 1e-12);
        }
        for a in 1..=depth {
            for b in 1..=depth - a {
                prop_assert!(d[a + b] <= d[a] * d[b], "d_{} > d_{} d_{}", a + b, a, b);
                let (ha, ea) = hs[a];
                let (hb, eb) = hs[b];
                let (hab, eab) = hs[a + b];
                prop_assert!(hab - eab <= ha + hb + ea + eb + 1e-12);
            }
        }
    }

    #[test]
    fn bound_chain_for_uniform_pairs(
        num in 1i64..8,
        den in 8i64..40,
        t in 0i64..5,
        depth in 3usize..9,
    ) {
        // a contracting and a possibly expanding map
        let s = rational_pair(
            Rational::new(num, den),
            Rational::from_int(0),
            Rational::new(den, 4 * num + 3),
            Rational::from_int(t + 1),
        );
        let v = validate(&s).unwrap();
        let chi = lyapunov_exact(&s).unwrap().unwrap();
        let g = growth_series(&s, &GrowthOptions::new(depth)).unwrap();
        let verdict = assemble_verdict(&VerdictInputs {
            dim: 1,
            m: 2,
            h: entropy_h(s.probabilities()),
            chi: &chi,
            contraction: v.contraction,
            growth: Some(&g),
            field_mode: s.field().mode(),
            irreducibility: s.field().irreducibility(),
        });
        if verdict.withheld.is_none() {
            prop_assert!(chain_holds(&verdict, 1e-12), "{:?}", verdict);
        }
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn enumeration_is_independent_of_worker_count() {
    let s = bernoulli(&golden(), Some(vec![Rational::new(1, 3), Rational::new(2, 3)]));
    let run = || {
        let mut level = SemigroupLevel::root(&s);
        let mut out = Vec::new();
        for _ in 0..14 {
            level = expand_level(&level, &s, DEFAULT_BUDGET, true).unwrap();
            out.push((
                level.classes.iter().map(|c| (c.key.clone(), c.mass.clone(), c.witness.clone())).collect::<Vec<_>>(),
                level.collisions.clone(),
                level.entropy().0.to_bits(),
            ));
        }
        out
    };
    let one = in_pool(1, run);
    for threads in [2, 3, 8] {
        assert!(in_pool(threads, run) == one, "{threads} workers");
    }
}

#[test]
fn sampling_is_independent_of_worker_count() {
    let s = bernoulli(&golden(), None);
    let run = || sample_stationary(&s, &SampleOptions::new(5000, 42)).unwrap();
    let one = in_pool(1, run);
    for threads in [2, 5] {
        assert_eq!(in_pool(threads, run), one);
    }
}

#[test]
fn witness_words_compose_to_their_class() {
    let f = golden();
    let s = digit_pair(&f);
    let mut level = SemigroupLevel::root(&s);
    for _ in 0..8 {
        level = expand_level(&level, &s, DEFAULT_BUDGET, false).unwrap();
    }
    for (i, c) in level.classes.iter().enumerate() {
        let w: Vec<usize> = c.witness.iter().map(|&x| x as usize).collect();
        assert_eq!(s.compose_word(&w).unwrap(), level.class_map(&s, i).unwrap());
    }
}
