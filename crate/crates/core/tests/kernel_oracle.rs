//! The chain evaluator of `D_{t,s}` against plain nested loops, plus the
//! single-pole rewrites and structural properties.

use doublepole::nahm::{
    d_series, d_series_symmetry_check, multisum_rhs, single_var_rhs, NahmSpec, WMode,
};
use doublepole::series::{Ctx, QSeries};
use num_traits::ToPrimitive;

/// Bivariate table `c[e][d]` for `q^e w^d`, truncated at `q^order`.
#[derive(Clone)]
struct Table {
    order: usize,
    c: Vec<Vec<i128>>,
}

impl Table {
    fn one(order: usize) -> Self {
        let mut c = vec![vec![0i128; order + 1]; order];
        c[0][0] = 1;
        Table { order, c }
    }

    fn zero(order: usize) -> Self {
        Table {
            order,
            c: vec![vec![0i128; order + 1]; order],
        }
    }

    /// times `1 + w q^i`
    fn mul_one_plus_wq(&mut self, i: usize) {
        for e in (0..self.order).rev() {
            for d in (0..self.order).rev() {
                if e >= i {
                    let v = self.c[e - i][d];
                    self.c[e][d + 1] += v;
                }
            }
        }
    }

    /// times `1 / (1 - q^i)`, `i >= 1`
    fn div_one_minus_q(&mut self, i: usize) {
        for e in i..self.order {
            for d in 0..=self.order {
                let v = self.c[e - i][d];
                self.c[e][d] += v;
            }
        }
    }

    fn add_shifted(&mut self, other: &Table, s: usize) {
        for e in s..self.order {
            for d in 0..=self.order {
                self.c[e][d] += other.c[e - s][d];
            }
        }
    }
}

/// `sum (-w)_{n_1} q^{sum a_j n_j + sum n_j n_{j+1}} / prod (q)_{n_j}^2` over all
/// tuples with exponent below `order`.
fn nested_loops(linear: &[u64], order: usize) -> Table {
    let mut out = Table::zero(order);
    let mut n = vec![0usize; linear.len()];
    'outer: loop {
        let e: usize = linear
            .iter()
            .zip(&n)
            .map(|(&a, &x)| a as usize * x)
            .sum::<usize>()
            + n.windows(2).map(|p| p[0] * p[1]).sum::<usize>();
        if e < order {
            let mut term = Table::one(order);
            for i in 0..n[0] {
                term.mul_one_plus_wq(i);
            }
            for &x in &n {
                for i in 1..=x {
                    term.div_one_minus_q(i);
                    term.div_one_minus_q(i);
                }
            }
            out.add_shifted(&term, e);
        }
        for j in 0..n.len() {
            n[j] += 1;
            if n[j] < order {
                continue 'outer;
            }
            n[j] = 0;
        }
        return out;
    }
}

fn coefficient(s: &QSeries, e: usize, d: i64) -> i128 {
    s.coeff(e).coeff(d).to_i128().expect("small coefficient")
}

fn assert_matches(table: &Table, s: &QSeries, w: WMode, label: &str) {
    for e in 0..table.order {
        match w {
            WMode::Formal => {
                for d in 0..=table.order {
                    assert_eq!(
                        table.c[e][d],
                        coefficient(s, e, d as i64),
                        "{label}: q^{e} w^{d}"
                    );
                }
            }
            WMode::One => {
                let total: i128 = table.c[e].iter().sum();
                assert_eq!(total, coefficient(s, e, 0), "{label}: q^{e}");
            }
            WMode::Zero => assert_eq!(table.c[e][0], coefficient(s, e, 0), "{label}: q^{e}"),
            WMode::Half => unreachable!(),
        }
    }
}

#[test]
fn chain_kernel_matches_nested_loops() {
    let order = 15;
    for t in 1..=3 {
        for s in 1..=t + 1 {
            let spec = NahmSpec::new(t, s, WMode::Zero);
            let table = nested_loops(&spec.linear(), order);
            for w in [WMode::Zero, WMode::One, WMode::Formal] {
                let got = d_series(&NahmSpec::new(t, s, w), w.ctx(order)).unwrap();
                assert_matches(&table, &got, w, &format!("D_{{{t},{s}}} w={w}"));
            }
        }
    }
}

#[test]
fn exponent_vectors_match_nested_loops() {
    let order = 14;
    for a in [
        vec![3],
        vec![1, 4],
        vec![2, 1, 1],
        vec![1, 2, 1],
        vec![2, 3, 1],
    ] {
        let table = nested_loops(&a, order);
        let got = d_series(
            &NahmSpec::with_exponents(a.clone(), WMode::Formal),
            WMode::Formal.ctx(order),
        )
        .unwrap();
        assert_matches(&table, &got, WMode::Formal, &format!("exponents {a:?}"));
    }
}

#[test]
fn multisum_rewrite_holds() {
    for t in 2..=4 {
        for s in 2..=t + 1 {
            let ctx = WMode::Formal.ctx(25);
            let lhs = d_series(&NahmSpec::new(t, s, WMode::Formal), ctx).unwrap();
            let rhs = multisum_rhs(t, s, WMode::Formal, ctx).unwrap();
            assert_eq!(lhs.first_mismatch(&rhs).unwrap(), None, "t={t} s={s}");
        }
    }
}

#[test]
fn single_variable_rewrite_holds() {
    for a in 1..=2u64 {
        for w in [WMode::Zero, WMode::One, WMode::Formal] {
            let ctx = w.ctx(30);
            let lhs = d_series(&NahmSpec::new(1, 3 - a as usize, w), ctx).unwrap();
            let rhs = single_var_rhs(a, w, ctx).unwrap();
            assert_eq!(lhs.first_mismatch(&rhs).unwrap(), None, "a={a} w={w}");
        }
    }
}

#[test]
fn reflection_symmetry_at_w_zero() {
    for t in 1..=4 {
        for s in 1..=t {
            assert!(
                d_series_symmetry_check(t, s, Ctx::plain(20)).unwrap(),
                "t={t} s={s}"
            );
        }
    }
}

#[test]
fn every_sum_starts_with_one() {
    for t in 1..=4 {
        for s in 1..=t + 1 {
            for w in [WMode::Zero, WMode::One, WMode::Half, WMode::Formal] {
                let d = d_series(&NahmSpec::new(t, s, w), w.ctx(12)).unwrap();
                assert!(d.coeff(0).is_one(), "t={t} s={s} w={w}");
                assert_eq!(d.valuation(), Some(0));
            }
        }
    }
}

#[test]
fn w_zero_is_nonnegative() {
    // coefficients of D_{t,s}(0,q) count weighted tuples
    for t in 1..=3 {
        for s in 1..=t + 1 {
            let d = d_series(&NahmSpec::new(t, s, WMode::Zero), Ctx::plain(20)).unwrap();
            assert!(d.to_i64_vec().iter().all(|&c| c >= 0), "t={t} s={s}");
        }
    }
}
