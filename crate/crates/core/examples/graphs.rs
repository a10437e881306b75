//! Built-in graph generators and edge-list round trips.
//!
//! cargo run --example graphs

use deffuant_lab::graph::{generate, load_edge_list, GraphKind};

fn main() -> deffuant_lab::error::Result<()> {
    for spec in ["complete:6", "path:6", "cycle:6", "star:6", "torus:3x4", "er:12:0.3"] {
        let kind: GraphKind = spec.parse()?;
        let gen = generate(kind, 7)?;
        let g = &gen.graph;
        let max_degree = (0..g.n_vertices()).map(|x| g.degree(x)).max().unwrap_or(0);
        println!(
            "{spec:<10} n={:<3} |E|={:<3} max degree={max_degree} rejected draws={}",
            g.n_vertices(),
            g.n_edges(),
            gen.rejected_draws
        );
    }

    let text = "# a square with one diagonal\n0 1\n1 2\n2 3\n3 0\n0 2\n";
    let g = load_edge_list(text)?;
    println!("loaded {} vertices, {} edges:\n{}", g.n_vertices(), g.n_edges(), g.to_edge_list());

    // a disconnected edge list is rejected
    if let Err(e) = load_edge_list("0 1\n2 3\n") {
        println!("rejected: {e}");
    }
    Ok(())
}
