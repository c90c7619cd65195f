use krfactor::generate::{gen_dense_graph, gen_min_degree_instance};
use krfactor::graph::{degree_floor, min_star_degree, sparsify};
use krfactor::solver::find_factor;
use krfactor::transversal::{
    bpi_min_degree_trial, build_b_pi, lift_factor, reduce_nonpartite, transversal_oracle,
    verify_transversal, verify_transversal_factor, GraphFamily, NonPartiteFamily,
    PermutationBundle,
};
use krfactor::{PartiteGraph, RandomSeed, SimpleGraph, Vertex};
use proptest::prelude::*;

fn random_family(r: usize, n: usize, keep: f64, seed: RandomSeed) -> GraphFamily {
    let m = n * r * (r - 1) / 2;
    let full = PartiteGraph::complete(r, n).unwrap();
    let graphs = (0..m)
        .map(|i| sparsify(&full, keep, seed.derive(i as u64)).unwrap())
        .collect();
    GraphFamily::new(r, n, graphs).unwrap()
}

fn dense_family(r: usize, n: usize, gamma: f64, seed: RandomSeed) -> GraphFamily {
    let m = n * r * (r - 1) / 2;
    let graphs = (0..m)
        .map(|i| gen_min_degree_instance(r, n, gamma, 0.0, seed.derive(i as u64)).unwrap())
        .collect();
    GraphFamily::new(r, n, graphs).unwrap()
}

/// Index of the graph governing `{s, t}`, from the lexicographic block
/// order: pairs `(a, b)` with `a < b` in order, `n` indices each.
fn governing(r: usize, n: usize, bundle: &PermutationBundle, s: Vertex, t: Vertex) -> usize {
    let (s, t) = (s.min(t), s.max(t));
    let (i, j) = (s as usize / n, t as usize / n);
    let mut rank = 0;
    'outer: for a in 0..r {
        for b in a + 1..r {
            if (a, b) == (i, j) {
                break 'outer;
            }
            rank += 1;
        }
    }
    rank * n + bundle.apply(i, s) as usize - i * n
}

fn clique_lists(f: &krfactor::Factor) -> Vec<Vec<Vertex>> {
    f.cliques().iter().map(|c| c.vertices().to_vec()).collect()
}

#[test]
fn dense_family_round_trip() {
    let mut successes = 0;
    for s in 0..50 {
        let fam = dense_family(3, 9, 0.1, RandomSeed::with_stream(31, s));
        let aux = build_b_pi(
            &fam,
            &PermutationBundle::random(3, 9, RandomSeed::with_stream(32, s)),
        )
        .unwrap();
        if let Some(f) = find_factor(&aux.graph) {
            let tf = lift_factor(&aux, &f).unwrap();
            verify_transversal_factor(&fam, &tf).unwrap();
            let mut indices: Vec<usize> = tf.assignment.iter().map(|&(_, i)| i).collect();
            indices.sort_unstable();
            assert_eq!(indices, (0..fam.len()).collect::<Vec<_>>());
            successes += 1;
        }
    }
    assert!(successes > 0);
}

#[test]
fn exhaustive_bundles_agree_with_oracle_at_n2() {
    let mut solvable = 0;
    for s in 0..50 {
        let fam = random_family(3, 2, 0.7, RandomSeed::with_stream(41, s));
        let oracle = transversal_oracle(&fam).unwrap();
        if let Some(tf) = &oracle {
            verify_transversal_factor(&fam, tf).unwrap();
        }
        let mut any = false;
        let bundles: Vec<_> = PermutationBundle::all(3, 2).collect();
        assert_eq!(bundles.len(), 8);
        for bundle in bundles {
            let aux = build_b_pi(&fam, &bundle).unwrap();
            if let Some(f) = find_factor(&aux.graph) {
                let tf = lift_factor(&aux, &f).unwrap();
                verify_transversal_factor(&fam, &tf).unwrap();
                any = true;
            }
        }
        if any {
            assert!(
                oracle.is_some(),
                "family {s}: a bundle succeeds but the oracle finds nothing"
            );
            solvable += 1;
        }
    }
    assert!(solvable > 0);
}

#[test]
fn oracle_examples() {
    assert!(transversal_oracle(&GraphFamily::complete(3, 2).unwrap())
        .unwrap()
        .is_some());
    let full = PartiteGraph::complete(3, 2).unwrap();
    let mut graphs = vec![full.clone(); 6];
    graphs[3] = PartiteGraph::empty(3, 2).unwrap();
    let fam = GraphFamily::new(3, 2, graphs).unwrap();
    assert!(transversal_oracle(&fam).unwrap().is_none());
    assert!(transversal_oracle(&GraphFamily::complete(3, 5).unwrap()).is_err());
    assert!(transversal_oracle(&GraphFamily::complete(4, 1).unwrap()).is_err());
}

#[test]
fn flipping_first_permutation_swaps_governing_graphs() {
    // Graphs 0 and 1 govern the pair (V_0, V_1); graph 0 has only the edge
    // 0-2, graph 1 only 1-3. Other blocks are complete.
    let full = PartiteGraph::complete(3, 2).unwrap();
    let mut graphs = vec![full.clone(); 6];
    graphs[0] = PartiteGraph::new(3, 2, [(0, 2)]).unwrap();
    graphs[1] = PartiteGraph::new(3, 2, [(1, 3)]).unwrap();
    let fam = GraphFamily::new(3, 2, graphs).unwrap();
    let id = build_b_pi(&fam, &PermutationBundle::identity(3, 2)).unwrap();
    // Identity: vertex 0 reads graph 0, vertex 1 reads graph 1.
    let cross = |g: &PartiteGraph| -> Vec<(Vertex, Vertex)> {
        [(0, 2), (0, 3), (1, 2), (1, 3)]
            .into_iter()
            .filter(|&(a, b)| g.has_edge(a, b))
            .collect()
    };
    assert_eq!(cross(&id.graph), vec![(0, 2), (1, 3)]);
    let flipped = PermutationBundle::new(2, vec![vec![1, 0], vec![2, 3], vec![4, 5]]).unwrap();
    let fl = build_b_pi(&fam, &flipped).unwrap();
    // Flipped: vertex 0 reads graph 1 (no edge at 0), vertex 1 reads graph 0.
    assert_eq!(cross(&fl.graph), vec![]);
    let mut graphs = fam.graphs().to_vec();
    graphs[0] = PartiteGraph::new(3, 2, [(0, 2), (1, 2)]).unwrap();
    let fam2 = GraphFamily::new(3, 2, graphs).unwrap();
    assert_eq!(
        cross(&build_b_pi(&fam2, &flipped).unwrap().graph),
        vec![(1, 2)]
    );
    assert_eq!(
        cross(
            &build_b_pi(&fam2, &PermutationBundle::identity(3, 2))
                .unwrap()
                .graph
        ),
        vec![(0, 2), (1, 3)]
    );
}

fn check_degree_identity(fam: &GraphFamily, bundle: &PermutationBundle) {
    let (r, n) = (fam.r(), fam.n());
    let aux = build_b_pi(fam, bundle).unwrap();
    for i in 0..r {
        for j in i + 1..r {
            for s in (i * n)..((i + 1) * n) {
                let s = s as Vertex;
                let idx = governing(r, n, bundle, s, (j * n) as Vertex);
                assert_eq!(
                    aux.graph.degree_into(s, j),
                    fam.graph(idx).degree_into(s, j)
                );
            }
        }
    }
}

#[test]
fn row_degree_identity_exhaustive() {
    for n in 1..=4 {
        let fam = random_family(3, n, 0.6, RandomSeed::new(n as u64));
        for bundle in PermutationBundle::all(3, n) {
            check_degree_identity(&fam, &bundle);
        }
    }
    // At n = 5 the row degrees of part i depend on π_i alone, so running
    // every π_i with the other parts fixed covers every case.
    let fam = random_family(3, 5, 0.6, RandomSeed::new(5));
    let perms: Vec<Vec<Vertex>> = PermutationBundle::all(1, 5)
        .map(|b| (0..5).map(|v| b.apply(0, v)).collect())
        .collect();
    assert_eq!(perms.len(), 120);
    for part in 0..3 {
        for p in &perms {
            let mut all: Vec<Vec<Vertex>> = (0..3)
                .map(|i| (i * 5..(i + 1) * 5).map(|v| v as Vertex).collect())
                .collect();
            all[part] = p.iter().map(|&v| v + (part * 5) as Vertex).collect();
            check_degree_identity(&fam, &PermutationBundle::new(5, all).unwrap());
        }
    }
}

#[test]
fn bpi_trial_on_complete_family() {
    let fam = GraphFamily::complete(3, 4).unwrap();
    let rep = bpi_min_degree_trial(&fam, 0.2, 10, RandomSeed::new(0)).unwrap();
    assert_eq!(rep.frequency, 1.0);
    assert_eq!(rep.min_observed, 4);
}

#[test]
fn bpi_trial_rejects_sparse_members() {
    let mut graphs = GraphFamily::complete(3, 4).unwrap().graphs().to_vec();
    graphs[5] = PartiteGraph::empty(3, 4).unwrap();
    let fam = GraphFamily::new(3, 4, graphs).unwrap();
    let err = bpi_min_degree_trial(&fam, 0.2, 5, RandomSeed::new(0)).unwrap_err();
    assert!(err.to_string().contains("[5]"));
}

#[test]
fn bpi_min_degree_claim_at_n200() {
    let (r, n, gamma) = (3, 200, 0.2);
    let fam = dense_family(r, n, gamma, RandomSeed::new(42));
    let rep = bpi_min_degree_trial(&fam, gamma, 50, RandomSeed::new(43)).unwrap();
    assert_eq!(rep.floor, degree_floor(r, n, gamma / 2.0));
    assert!(rep.frequency >= 0.95, "frequency {}", rep.frequency);
    // Rows are inherited from one member each, so the row side never drops
    // below the member floor.
    let aux = build_b_pi(&fam, &PermutationBundle::random(r, n, RandomSeed::new(44))).unwrap();
    let hyp = degree_floor(r, n, gamma);
    for i in 0..r {
        for j in i + 1..r {
            assert!(aux
                .graph
                .part_range(i)
                .all(|s| aux.graph.degree_into(s, j) >= hyp));
        }
    }
}

fn nonpartite_family(
    r: usize,
    count: usize,
    gamma: f64,
    keep: f64,
    seed: RandomSeed,
) -> NonPartiteFamily {
    let m = count / r * r * (r - 1) / 2;
    let min_fraction = 1.0 - 1.0 / r as f64 + gamma;
    let graphs = (0..m)
        .map(|i| gen_dense_graph(count, min_fraction, keep, seed.derive(i as u64)).unwrap())
        .collect();
    NonPartiteFamily::new(r, count, graphs).unwrap()
}

#[test]
fn nonpartite_reduction_at_n300() {
    let (r, count, gamma) = (3, 300, 0.2);
    let fam = nonpartite_family(r, count, gamma, 0.95, RandomSeed::new(51));
    let seeds = 100;
    let mut quick = 0;
    for s in 0..seeds {
        let red = reduce_nonpartite(&fam, gamma, RandomSeed::with_stream(52, s), 10).unwrap();
        if red.attempts <= 3 {
            quick += 1;
        }
        if s == 0 {
            let floor = degree_floor(r, count / r, gamma / 2.0);
            assert!(red
                .family
                .graphs()
                .iter()
                .all(|g| min_star_degree(g) >= floor));
            // Partite edges are exactly the original cross-class edges.
            let size = count / r;
            let g0 = &fam.graphs[0];
            let h0 = red.family.graph(0);
            for a in 0..count {
                for b in a + 1..count {
                    let (ca, cb) = (a / size, b / size);
                    if ca != cb {
                        let (u, v) = (red.classes[ca][a % size], red.classes[cb][b % size]);
                        assert_eq!(h0.has_edge(a as Vertex, b as Vertex), g0.has_edge(u, v));
                    }
                }
            }
        }
    }
    assert!(
        quick * 100 >= 99 * seeds,
        "{quick} of {seeds} accepted within 3 attempts"
    );
}

#[test]
fn complete_nonpartite_family_accepted_first_time() {
    let graphs = vec![SimpleGraph::complete(9); 9];
    let fam = NonPartiteFamily::new(3, 9, graphs).unwrap();
    let red = reduce_nonpartite(&fam, 0.2, RandomSeed::new(1), 5).unwrap();
    assert_eq!(red.attempts, 1);
    assert_eq!(
        red.family.graphs()[0],
        PartiteGraph::complete(3, 3).unwrap()
    );
}

#[test]
fn verifier_rejections() {
    let fam = GraphFamily::complete(3, 1).unwrap();
    let tri = vec![vec![0, 1, 2]];
    let dup = verify_transversal(&fam, &tri, &[((0, 1), 0), ((0, 2), 0), ((1, 2), 2)]).unwrap_err();
    assert_eq!(dup.reason, "index");
    assert!(dup.detail.contains("twice"));
    let mut graphs = fam.graphs().to_vec();
    graphs[1] = PartiteGraph::new(3, 1, [(0, 2)]).unwrap();
    let fam2 = GraphFamily::new(3, 1, graphs).unwrap();
    let err =
        verify_transversal(&fam2, &tri, &[((0, 1), 1), ((0, 2), 0), ((1, 2), 2)]).unwrap_err();
    assert_eq!(err.reason, "membership");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn b_pi_edges_follow_the_governing_rule(n in 1usize..=4, keep in 0.0f64..=1.0, seed in any::<u64>()) {
        let r = 3;
        let fam = random_family(r, n, keep, RandomSeed::new(seed));
        let bundle = PermutationBundle::random(r, n, RandomSeed::new(seed ^ 0xabc));
        let aux = build_b_pi(&fam, &bundle).unwrap();
        for s in 0..(r * n) as Vertex {
            for t in s + 1..(r * n) as Vertex {
                if s as usize / n == t as usize / n {
                    continue;
                }
                let idx = governing(r, n, &bundle, s, t);
                prop_assert_eq!(idx, fam.governing_index(&bundle, s, t));
                prop_assert_eq!(aux.graph.has_edge(s, t), fam.graph(idx).has_edge(s, t));
            }
        }
    }

    #[test]
    fn lifted_factors_always_verify(n in 1usize..=5, seed in any::<u64>()) {
        let fam = random_family(3, n, 0.9, RandomSeed::new(seed));
        let aux = build_b_pi(&fam, &PermutationBundle::random(3, n, RandomSeed::new(!seed))).unwrap();
        if let Some(f) = find_factor(&aux.graph) {
            let tf = lift_factor(&aux, &f).unwrap();
            prop_assert!(verify_transversal_factor(&fam, &tf).is_ok());
            prop_assert!(verify_transversal(&fam, &clique_lists(&f), &tf.assignment).is_ok());
            let mut used: Vec<usize> = tf.assignment.iter().map(|&(_, i)| i).collect();
            used.sort_unstable();
            prop_assert_eq!(used, (0..fam.len()).collect::<Vec<_>>());
        }
    }
}
