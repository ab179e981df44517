macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        #[path = $file]
        mod $module;
    };
}

example!(race_detection, "../examples/race_detection.rs");
example!(atomicity, "../examples/atomicity.rs");
example!(trace_equivalence, "../examples/trace_equivalence.rs");
example!(zielonka_cas, "../examples/zielonka_cas.rs");
example!(monitor_product, "../examples/monitor_product.rs");
example!(gossip_tree, "../examples/gossip_tree.rs");
example!(trace_closure, "../examples/trace_closure.rs");

#[test]
fn examples_run() {
    race_detection::run_example().unwrap();
    atomicity::run_example().unwrap();
    trace_equivalence::run_example().unwrap();
    zielonka_cas::run_example().unwrap();
    monitor_product::run_example().unwrap();
    gossip_tree::run_example().unwrap();
    trace_closure::run_example().unwrap();
}
