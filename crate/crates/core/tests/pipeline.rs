use proptest::prelude::*;
use sparsefwd_core::verify::{oracle_dot, topk_agree};
use sparsefwd_core::{
    apply_permutation, build_index, full_scan_topk, generate, rgb_reorder, BisectionConfig, Codec, DenseQuery, Preset,
    Scorer, SparseDataset, SparseVector, ValueFormat,
};

fn all_codecs() -> Vec<Codec> {
    let mut v = Codec::ALL_DEFAULT.to_vec();
    v.extend((1..=16).map(|k| Codec::Zeta { k }));
    v
}

fn arb_doc(dim: u32) -> impl Strategy<Value = SparseVector> {
    prop::collection::btree_set(0..dim, 0..40usize).prop_flat_map(|set| {
        let n = set.len();
        (Just(set), prop::collection::vec(0.01f32..4.0, n))
            .prop_map(|(set, vals)| SparseVector::new(set.into_iter().collect(), vals).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_codec_stores_and_scores(docs in prop::collection::vec(arb_doc(1 << 16), 1..12), qdoc in arb_doc(1 << 16)) {
        let ds = SparseDataset::from_docs(1 << 16, docs).unwrap();
        let q = DenseQuery::from_sparse(&qdoc, ds.dim()).unwrap();
        for codec in all_codecs() {
            for fmt in [ValueFormat::F32, ValueFormat::F16, ValueFormat::FixedU8 { frac_bits: 6 }] {
                let idx = build_index(&ds, codec, fmt, None).unwrap();
                let mut scorer = Scorer::new(&idx);
                for (i, doc) in ds.docs().iter().enumerate() {
                    prop_assert_eq!(idx.doc_components(i).unwrap(), doc.components());
                    let (exact, tol) = oracle_dot(doc, &q, fmt);
                    let got = scorer.score(i, &q).unwrap() as f64;
                    prop_assert!((got - exact).abs() <= tol, "{} {}: {} vs {}", codec, fmt, got, exact);
                }
            }
        }
    }
}

#[test]
fn reordering_preserves_scores() {
    let ds = generate(&Preset::SpladeLike.docs(800, 21)).unwrap();
    let queries = generate(&Preset::SpladeLike.queries(10, 21)).unwrap();
    let perm = rgb_reorder(&ds, &BisectionConfig::default()).unwrap();
    let plain = build_index(&ds, Codec::DotVByte, ValueFormat::F32, None).unwrap();
    let reordered = build_index(&ds, Codec::DotVByte, ValueFormat::F32, Some(&perm)).unwrap();
    assert_eq!(reordered.to_dataset().unwrap(), apply_permutation(&ds, &perm).unwrap());
    assert!(reordered.bits_per_component() < plain.bits_per_component());

    for q in queries.docs() {
        let dq = DenseQuery::from_sparse(q, ds.dim()).unwrap();
        let mapped = DenseQuery::from_sparse(&perm.apply_vector(q).unwrap(), ds.dim()).unwrap();
        let oracle: Vec<f64> = ds.docs().iter().map(|d| oracle_dot(d, &dq, ValueFormat::F32).0).collect();
        let a = full_scan_topk(&plain, &dq, 10).unwrap().hits;
        let b = full_scan_topk(&reordered, &mapped, 10).unwrap().hits;
        assert!(topk_agree(&a, &b, &oracle, 10, 1e-4 * oracle.iter().cloned().fold(0.0, f64::max)));
    }
}

#[test]
fn empty_documents_score_zero() {
    let ds = SparseDataset::from_docs(
        100,
        vec![SparseVector::new(vec![], vec![]).unwrap(), SparseVector::new(vec![3], vec![2.0]).unwrap()],
    )
    .unwrap();
    let q = DenseQuery::from_sparse(&SparseVector::new(vec![3, 50], vec![1.5, 1.0]).unwrap(), 100).unwrap();
    for codec in all_codecs() {
        let idx = build_index(&ds, codec, ValueFormat::F32, None).unwrap();
        let hits = full_scan_topk(&idx, &q, 5).unwrap().hits;
        assert_eq!(hits.len(), 2, "{codec}");
        assert_eq!((hits[0].doc, hits[0].score), (1, 3.0));
        assert_eq!((hits[1].doc, hits[1].score), (0, 0.0));
    }
}
