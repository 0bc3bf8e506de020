//! Times the exact solver on sampled sum graphs: `clique_bench N Q seeds`.

use paley_core::cayley_graph::build_graph;
use paley_core::clique_solver::{max_clique_exact, SearchBudget};
use paley_core::sign_models::sample_multiplicative;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let (n, q, seeds) = (args[0], args[1], args[2]);
    let t = std::time::Instant::now();
    for seed in 0..seeds {
        let g = build_graph(&sample_multiplicative(n, q, seed).unwrap());
        let r = max_clique_exact(&g, SearchBudget::unlimited());
        println!("seed {seed}: omega {} nodes {} {:.2}s", r.size, r.nodes_expanded, r.elapsed.as_secs_f64());
    }
    println!("total {:.2}s", t.elapsed().as_secs_f64());
}
