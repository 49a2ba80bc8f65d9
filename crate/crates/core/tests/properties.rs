use neutral_stab::criteria::{
    eval_thm1_a, eval_thm1_b, thm1_lhs, window_integral_limsup, LimsupMethod, Verdict, WindowOptions,
};
use neutral_stab::funcspec::{DelayFunc, FuncExpr, Node, ParamBounds};
use neutral_stab::series::{big_b, iterated_delay};
use proptest::prelude::*;

fn node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![(-100.0f64..100.0).prop_map(Node::Const), Just(Node::T)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let b = |n: Node| Box::new(n);
        prop_oneof![
            inner.clone().prop_map(move |x| Node::Neg(b(x))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Node::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Node::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Node::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Node::Div(b(x), b(y))),
            inner.clone().prop_map(move |x| Node::Sin(b(x))),
            inner.clone().prop_map(move |x| Node::Cos(b(x))),
            inner.clone().prop_map(move |x| Node::Abs(b(x))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Node::Min(b(x), b(y))),
            (inner.clone(), inner).prop_map(move |(x, y)| Node::Max(b(x), b(y))),
        ]
    })
}

prop_compose! {
    fn bounds()(
        a0 in 0.0f64..0.9,
        da in 0.0f64..0.09,
        b0 in 0.01f64..5.0,
        db in 0.0f64..2.0,
        tau in 0.01f64..3.0,
        sigma in 0.01f64..3.0,
        frac in 0.0f64..=1.0,
    ) -> ParamBounds {
        ParamBounds::new(a0, a0 + da, b0, b0 + db, tau, sigma, frac * tau).unwrap()
    }
}

fn consistent(v: &Verdict) -> bool {
    v.satisfied == (v.precondition_ok && v.lhs < v.rhs) && (!v.satisfied || v.margin > 0.0)
}

proptest! {
    #[test]
    fn printed_expressions_reparse(n in node(), t in -50.0f64..50.0) {
        let e = FuncExpr::from_node(n);
        let back = FuncExpr::parse(&e.to_string()).unwrap();
        prop_assert_eq!(back.to_string(), e.to_string());
        match (e.eval(t), back.eval(t)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y),
        }
    }

    #[test]
    fn verdicts_are_consistent(p in bounds()) {
        prop_assert!(consistent(&eval_thm1_a(&p)));
        prop_assert!(consistent(&eval_thm1_b(&p)));
    }

    #[test]
    fn thm1_lhs_grows_with_lags_and_rate(p in bounds(), c in 1.0f64..3.0) {
        let base = thm1_lhs(&p);
        let mut q = p;
        q.tau *= c;
        prop_assert!(thm1_lhs(&q) >= base);
        let mut q = p;
        q.sigma *= c;
        prop_assert!(thm1_lhs(&q) >= base);
        let mut q = p;
        q.B0 *= c;
        prop_assert!(thm1_lhs(&q) >= base);
    }

    /// Rescaling time by c multiplies lags by c and rates by 1/c; verdicts must not change.
    #[test]
    fn thm1_is_time_scale_invariant(p in bounds(), c in 0.2f64..5.0) {
        let mut q = p;
        q.tau *= c;
        q.sigma *= c;
        q.h_lag_inf *= c;
        q.b0 /= c;
        q.B0 /= c;
        let rel = (thm1_lhs(&q) - thm1_lhs(&p)).abs() / thm1_lhs(&p);
        prop_assert!(rel < 1e-12);
        for (x, y) in [(eval_thm1_a(&p), eval_thm1_a(&q)), (eval_thm1_b(&p), eval_thm1_b(&q))] {
            if x.margin.abs() > 1e-9 && (x.precondition_ok == y.precondition_ok) {
                prop_assert_eq!(x.satisfied, y.satisfied);
            }
        }
    }

    #[test]
    fn big_b_sandwich(a in 0.0f64..0.9, amp_a in 0.0f64..1.0, b in 0.05f64..3.0, amp_b in 0.0f64..1.0,
                      lag in 0.05f64..2.0, t in 0.0f64..50.0) {
        let a_expr = FuncExpr::parse(&format!("{a:?}*(1+{:?}*sin(t))", amp_a * 0.1)).unwrap();
        let b_expr = FuncExpr::parse(&format!("{b:?}*(1+{amp_b:?}*cos(t))")).unwrap();
        let a_hi = a * (1.0 + amp_a * 0.1);
        let pb = ParamBounds::new(a * (1.0 - amp_a * 0.1), a_hi.min(0.99), b * (1.0 - amp_b).max(0.0), b * (1.0 + amp_b), 1.0, lag, 1.0).unwrap();
        let g = DelayFunc::constant(lag).unwrap();
        let v = big_b(&a_expr, &b_expr, &g, t, 0.0, &pb, 1e-10).unwrap();
        prop_assert!(v.value >= pb.b0 / (1.0 - pb.a0) - v.tail_bound - 1e-8);
        prop_assert!(v.value <= pb.B0 / (1.0 - pb.A0) + 1e-8);
    }

    #[test]
    fn iterated_lags_accumulate(lo in 0.05f64..1.0, width in 0.0f64..1.0, w in 0.1f64..5.0,
                                t in 0.0f64..100.0, n in 0usize..60) {
        let hi = lo + width;
        let lag = FuncExpr::parse(&format!("{:?}+{:?}*sin({w:?}*t)", lo + width / 2.0, width / 2.0)).unwrap();
        let g = DelayFunc::new(lag, lo, hi).unwrap();
        let s = iterated_delay(&g, t, n).unwrap();
        let slack = 1e-12 * (1.0 + t);
        prop_assert!(t - s <= n as f64 * hi + slack);
        prop_assert!(t - s >= n as f64 * lo - slack);
    }

    #[test]
    fn window_closed_form_matches_numeric(offset in 0.1f64..2.0, amp in -1.0f64..1.0, omega in 0.2f64..4.0,
                                          window in 0.1f64..4.0) {
        let b = FuncExpr::parse(&format!("{offset:?} + {:?}*sin({omega:?}*t)", amp * offset)).unwrap();
        let (closed, m) = window_integral_limsup(&b, window, &WindowOptions::default()).unwrap();
        prop_assert_eq!(m, LimsupMethod::ClosedForm);
        let opts = WindowOptions { force_numeric: true, horizon: 60.0, ..WindowOptions::default() };
        let (numeric, _) = window_integral_limsup(&b, window, &opts).unwrap();
        prop_assert!(numeric <= closed + 1e-6);
        prop_assert!(closed - numeric < 1e-4, "closed {} numeric {}", closed, numeric);
    }
}
