use hm_core::geometry::{Dims, GridPos, Orientation};
use hm_core::literal::{parse_literal, LiteralValue};
use hm_core::matrix::{resolve_interaction, PayoffMatrix};
use hm_core::planner::{compile_move_to, GridView};
use hm_core::substrate::Inventory;
use proptest::prelude::*;
use std::collections::{BTreeSet, HashMap, VecDeque};

fn rps_inventory() -> impl Strategy<Value = Inventory> {
    (0u32..20, 0u32..20, 0u32..20).prop_filter("non-empty", |(a, b, c)| a + b + c > 0).prop_map(|(a, b, c)| Inventory::rps(a, b, c))
}

fn literal() -> impl Strategy<Value = LiteralValue> {
    let leaf = prop_oneof![
        any::<i64>().prop_map(LiteralValue::Int),
        any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(LiteralValue::Real),
        any::<bool>().prop_map(LiteralValue::Bool),
        "[a-z '\"\\\\\n/_]{0,6}".prop_map(LiteralValue::Str),
    ];
    leaf.prop_recursive(4, 32, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(LiteralValue::List),
            prop::collection::vec(inner.clone(), 0..4).prop_map(LiteralValue::Tuple),
            prop::collection::btree_map("[a-z/]{1,5}", inner, 0..4).prop_map(|m| LiteralValue::Map(m.into_iter().collect())),
        ]
    })
}

fn bfs(view: &GridView, src: GridPos, dst: GridPos) -> Option<usize> {
    let mut dist = HashMap::from([(src, 0)]);
    let mut q = VecDeque::from([src]);
    while let Some(p) = q.pop_front() {
        if p == dst {
            return Some(dist[&p]);
        }
        for n in p.neighbors() {
            if view.passable(n) && !dist.contains_key(&n) {
                dist.insert(n, dist[&p] + 1);
                q.push_back(n);
            }
        }
    }
    None
}

proptest! {
    #[test]
    fn interactions_are_zero_sum(a in rps_inventory(), b in rps_inventory()) {
        let (r, c) = resolve_interaction(&a, &b, &PayoffMatrix::rock_paper_scissors()).unwrap();
        prop_assert_eq!(r + c, 0.0);
        prop_assert!(r.abs() <= 10.0);
    }

    #[test]
    fn rewards_ignore_inventory_scale(a in rps_inventory(), b in rps_inventory(), k in 1u32..50, m in 1u32..50) {
        let payoff = PayoffMatrix::rock_paper_scissors();
        let (r, _) = resolve_interaction(&a, &b, &payoff).unwrap();
        let (s, _) = resolve_interaction(&a.scaled(k), &b.scaled(m), &payoff).unwrap();
        prop_assert_eq!(r, s);
    }

    #[test]
    fn swapping_sides_negates(a in rps_inventory(), b in rps_inventory()) {
        let payoff = PayoffMatrix::rock_paper_scissors();
        let (r, _) = resolve_interaction(&a, &b, &payoff).unwrap();
        let (s, _) = resolve_interaction(&b, &a, &payoff).unwrap();
        prop_assert!((r + s).abs() < 1e-12);
    }

    #[test]
    fn literals_round_trip(v in literal()) {
        let text = v.to_string();
        prop_assert_eq!(parse_literal(&text).unwrap(), v);
    }

    #[test]
    fn parser_never_panics(text in "\\PC{0,40}") {
        let _ = parse_literal(&text);
    }

    #[test]
    fn move_to_is_shortest(walls in prop::collection::btree_set((0i32..12, 0i32..12), 0..40),
                           src in (0i32..12, 0i32..12), dst in (0i32..12, 0i32..12), facing in 0usize..4) {
        let mut view = GridView::new(Dims { width: 12, height: 12 });
        view.blocked = walls.iter().map(|&(x, y)| GridPos::new(x, y)).collect::<BTreeSet<_>>();
        let (src, dst) = (GridPos::new(src.0, src.1), GridPos::new(dst.0, dst.1));
        prop_assume!(!view.blocked.contains(&src) && !view.blocked.contains(&dst));
        match (compile_move_to(&view, src, Orientation::from_index(facing), dst), bfs(&view, src, dst)) {
            (Ok(plan), Some(d)) => {
                prop_assert_eq!(plan.actions.len(), d);
                prop_assert!(plan.path.iter().all(|p| view.passable(*p)));
            }
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "planner {:?} vs bfs {:?}", a.map(|p| p.actions.len()), b),
        }
    }
}
