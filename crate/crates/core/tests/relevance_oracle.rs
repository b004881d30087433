use std::collections::BTreeSet;

use lingbias::metrics::{accuracy_at_k, ndcg_at_k, Qrels};
use lingbias::retrieval::{RankedList, RunFile};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_ndcg(list: &[String], rel: &BTreeSet<String>, k: usize) -> f64 {
    let mut dcg = 0.0;
    for (i, d) in list.iter().take(k).enumerate() {
        if rel.contains(d) {
            dcg += 1.0 / (i as f64 + 2.0).log2();
        }
    }
    let mut idcg = 0.0;
    for i in 0..k.min(rel.len()) {
        idcg += 1.0 / (i as f64 + 2.0).log2();
    }
    dcg / idcg
}

fn brute_hit(list: &[String], rel: &BTreeSet<String>, k: usize) -> f64 {
    let mut hit = 0.0;
    for d in list.iter().take(k) {
        if rel.contains(d) {
            hit = 1.0;
        }
    }
    hit
}

#[test]
fn matches_brute_force_on_200_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let n_docs = rng.gen_range(1..=50);
        let docs: Vec<String> = (0..n_docs).map(|i| format!("d{i}")).collect();
        let n_queries = rng.gen_range(1..=8);
        let k = rng.gen_range(1..=10);
        let mut lists = Vec::new();
        let mut raw = Vec::new();
        let mut qrels = Qrels::new();
        for q in 0..n_queries {
            let mut order = docs.clone();
            order.shuffle(&mut rng);
            order.truncate(rng.gen_range(1..=n_docs));
            let n_rel = rng.gen_range(1..=n_docs.min(6));
            let rel: BTreeSet<String> = docs.choose_multiple(&mut rng, n_rel).cloned().collect();
            qrels.insert(format!("q{q}"), rel.clone());
            lists.push(RankedList::from_ids(format!("q{q}"), &order));
            raw.push((order, rel));
        }
        let run = RunFile::new(lists, n_docs);
        let want_ndcg = raw.iter().map(|(l, r)| brute_ndcg(l, r, k)).sum::<f64>() / n_queries as f64;
        let want_acc = raw.iter().map(|(l, r)| brute_hit(l, r, k)).sum::<f64>() / n_queries as f64;
        assert!((ndcg_at_k(&run, &qrels, k).unwrap() - want_ndcg).abs() < 1e-9);
        assert!((accuracy_at_k(&run, &qrels, k).unwrap() - want_acc).abs() < 1e-9);
    }
}

#[test]
fn single_relevant_at_rank_two() {
    let run = RunFile::new(vec![RankedList::from_ids("q", &["x", "r", "y", "z"])], 4);
    let qrels = Qrels::from([("q".to_string(), BTreeSet::from(["r".to_string()]))]);
    let v = ndcg_at_k(&run, &qrels, 10).unwrap();
    assert!((v - 0.63093).abs() < 1e-5);
    assert_eq!(accuracy_at_k(&run, &qrels, 1).unwrap(), 0.0);
    assert_eq!(accuracy_at_k(&run, &qrels, 2).unwrap(), 1.0);
}
