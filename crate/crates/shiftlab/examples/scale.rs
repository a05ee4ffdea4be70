use std::time::Instant;
use shiftlab::abelian::GroupSpec;
use shiftlab::bentlib::bent_chirp;
use shiftlab::hiddenshift::{run_approx_subset, Backend, HiddenShiftInstance, RunConfig};

fn main() {
    for n in [1024u64, 4096] {
        let g = GroupSpec::cyclic(n);
        let f = bent_chirp(&g);
        let s = g.element(&[n / 3]).unwrap();
        let inst = HiddenShiftInstance::with_full_windows(f, s).unwrap();
        let t0 = Instant::now();
        let rep = run_approx_subset(
            &inst,
            RunConfig { backend: Backend::Lazy, ..RunConfig::default() },
        )
        .unwrap();
        println!(
            "|G| = {n}: P(s) = {:.12}, formula = {:.12}, elapsed = {:?}",
            rep.sim_prob,
            rep.formula_prob,
            t0.elapsed()
        );
    }
}
