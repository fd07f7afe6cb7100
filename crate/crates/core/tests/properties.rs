mod support;

use aed_core::featnet::{block_counts, encode_maps, extract_feature, train_pcanet};
use aed_core::flowlab::{color_wheel, compute_flow, encode_vector, WHEEL_SIZE};
use aed_core::metrics::{auc_pairwise_oracle, roc};
use aed_core::oneclass::{self, center_kernel, kernel_matrix};
use aed_core::pipeline::{component_areas, foreground_gate};
use aed_core::*;
use proptest::prelude::*;
use support::*;

fn maps_from_seed(seed: u64, n: usize, h: usize, w: usize, c: usize) -> Vec<Map> {
    let mut rng = rng(seed);
    (0..n).map(|_| random_map(&mut rng, h, w, c)).collect()
}

fn features(raw: &[Vec<f64>]) -> Vec<FeatureVector> {
    raw.iter().map(|v| FeatureVector::new(v.clone()).unwrap()).collect()
}

prop_compose! {
    fn small_hyper()(k in prop::sample::select(vec![3usize, 5]))
        (k in Just(k),
         l1 in 1usize..=8,
         l2 in 1usize..=8,
         block_h in 1usize..=8,
         block_w in 1usize..=8,
         h in k..=14,
         w in k..=14,
         lrn in any::<bool>())
        -> (PcanetHyper, usize, usize)
    {
        (PcanetHyper { k1: k, k2: k, l1, l2, block_h, block_w, lrn: lrn.then(LrnParams::default) }, h, w)
    }
}

prop_compose! {
    fn labeled_scores()(n in 2usize..=200)
        (scores in prop::collection::vec(0u8..30, n), mut labels in prop::collection::vec(any::<bool>(), n))
        -> (Vec<f64>, Vec<bool>)
    {
        labels[0] = true;
        labels[1] = false;
        (scores.into_iter().map(f64::from).collect(), labels)
    }
}

prop_compose! {
    fn feature_set()(n in 3usize..=8, dim in 2usize..=10)
        (raw in prop::collection::vec(prop::collection::vec(0.0f64..1.0, dim), n),
         sigma in 0.3f64..2.0)
        -> (Vec<Vec<f64>>, f64)
    {
        (raw, sigma)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn feature_length_and_code_range((hyper, h, w) in small_hyper(), seed in any::<u64>()) {
        let maps = maps_from_seed(seed, 3, h, w, 3);
        let model = train_pcanet(&maps, &hyper).unwrap();
        let feature = extract_feature(&maps[0], &model).unwrap();
        let blocks = h.div_ceil(hyper.block_h) * w.div_ceil(hyper.block_w);
        prop_assert_eq!(feature.len(), (1 << hyper.l2) * hyper.l1 * blocks);
        prop_assert_eq!(feature.len(), hyper.feature_len(h, w));
        for code in encode_maps(&maps[1], &model).unwrap() {
            prop_assert!(code.values().iter().all(|&t| t < (1 << hyper.l2)));
            let counts = block_counts(&code, hyper.block_h, hyper.block_w);
            let bins = 1 << hyper.l2;
            let bc = w.div_ceil(hyper.block_w);
            for (b, block) in counts.chunks(bins).enumerate() {
                let (r0, c0) = ((b / bc) * hyper.block_h, (b % bc) * hyper.block_w);
                let pixels = (h - r0).min(hyper.block_h) * (w - c0).min(hyper.block_w);
                prop_assert_eq!(block.iter().sum::<u64>(), pixels as u64);
            }
        }
    }

    #[test]
    fn trained_banks_are_orthonormal_and_sorted((hyper, h, w) in small_hyper(), seed in any::<u64>()) {
        let maps = maps_from_seed(seed, 3, h, w, 3);
        let model = train_pcanet(&maps, &hyper).unwrap();
        for bank in [model.bank1(), model.bank2()] {
            let f = bank.filters();
            for a in 0..f.len() {
                for b in 0..f.len() {
                    let dot: f64 = f[a].iter().zip(&f[b]).map(|(x, y)| x * y).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-8);
                }
            }
            prop_assert!(bank.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn auc_matches_pairwise_oracle((scores, labels) in labeled_scores()) {
        let data = LabeledScores::new(scores, labels).unwrap();
        let curve = roc(&data).unwrap();
        prop_assert!((curve.auc - auc_pairwise_oracle(&data).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&curve.eer));
    }

    #[test]
    fn auc_and_eer_ignore_monotone_transforms((scores, labels) in labeled_scores()) {
        let base = roc(&LabeledScores::new(scores.clone(), labels.clone()).unwrap()).unwrap();
        let moved: Vec<f64> = scores.iter().map(|&x| 5.0 * (x / 9.0).exp() - 2.0).collect();
        let other = roc(&LabeledScores::new(moved, labels).unwrap()).unwrap();
        prop_assert!((base.auc - other.auc).abs() < 1e-12);
        prop_assert!((base.eer - other.eer).abs() < 1e-12);
    }

    #[test]
    fn eer_is_zero_exactly_under_perfect_separation((scores, labels) in labeled_scores(), gap in any::<bool>()) {
        let scores: Vec<f64> = if gap {
            scores.iter().zip(&labels).map(|(s, &l)| if l { s + 100.0 } else { *s }).collect()
        } else {
            scores
        };
        let pos_min = scores.iter().zip(&labels).filter(|(_, &l)| l).map(|(s, _)| *s).fold(f64::INFINITY, f64::min);
        let neg_max = scores.iter().zip(&labels).filter(|(_, &l)| !l).map(|(s, _)| *s).fold(f64::NEG_INFINITY, f64::max);
        let curve = roc(&LabeledScores::new(scores, labels).unwrap()).unwrap();
        prop_assert_eq!(curve.eer == 0.0, pos_min > neg_max);
    }

    #[test]
    fn kernel_matrix_properties((raw, sigma) in feature_set()) {
        let feats = features(&raw);
        let v = kernel_matrix(&feats, sigma);
        let n = raw.len();
        for i in 0..n {
            prop_assert_eq!(v[(i, i)], 1.0);
            for j in 0..n {
                prop_assert_eq!(v[(i, j)], v[(j, i)]);
                prop_assert!(v[(i, j)] > 0.0 && v[(i, j)] <= 1.0);
            }
        }
        let (values, _) = jacobi_eigen((0..n).map(|i| (0..n).map(|j| v[(i, j)]).collect()).collect());
        prop_assert!(*values.last().unwrap() >= -1e-8);
        let c = center_kernel(&v).unwrap();
        for i in 0..n {
            prop_assert!(c.row(i).sum().abs() < 1e-9 * n as f64);
            prop_assert!(c.column(i).sum().abs() < 1e-9 * n as f64);
        }
        let rank = oneclass::fit(&feats, &KpcaHyper { sigma, q: 1 }).unwrap().rank();
        let full = oneclass::fit(&feats, &KpcaHyper { sigma, q: rank }).unwrap();
        let sum: f64 = full.lambdas().iter().sum();
        prop_assert!((sum - c.trace()).abs() <= 1e-8 * c.trace().abs().max(1e-300));
    }

    #[test]
    fn score_is_non_increasing_in_q((raw, sigma) in feature_set(), z in prop::collection::vec(-0.5f64..1.5, 10)) {
        let feats = features(&raw);
        let z = FeatureVector::new(z[..raw[0].len()].to_vec()).unwrap();
        let rank = oneclass::fit(&feats, &KpcaHyper { sigma, q: 1 }).unwrap().rank();
        let mut last = f64::INFINITY;
        for q in 1..=rank {
            let m = oneclass::fit(&feats, &KpcaHyper { sigma, q }).unwrap();
            let r = oneclass::reconstruction_error(&m, &z).unwrap();
            prop_assert!(r <= last + 1e-12, "q={} gave {} after {}", q, r, last);
            last = r;
        }
    }

    #[test]
    fn duplicating_training_data_keeps_score_order((raw, sigma) in feature_set()) {
        let feats = features(&raw);
        let rank = oneclass::fit(&feats, &KpcaHyper { sigma, q: 1 }).unwrap().rank();
        let q = rank.div_ceil(2);
        let once = oneclass::fit(&feats, &KpcaHyper { sigma, q }).unwrap();
        let doubled: Vec<FeatureVector> = feats.iter().chain(&feats).cloned().collect();
        let twice = oneclass::fit(&doubled, &KpcaHyper { sigma, q }).unwrap();
        let a = oneclass::reconstruction_errors(&once, &feats).unwrap();
        let b = oneclass::reconstruction_errors(&twice, &feats).unwrap();
        let argmax = |v: &[f64]| (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap();
        let gap_ok = {
            let mut sorted = a.clone();
            sorted.sort_by(|x, y| y.total_cmp(x));
            sorted[0] - sorted[1] > 1e-9
        };
        if gap_ok {
            prop_assert_eq!(argmax(&a), argmax(&b));
        }
        for i in 0..a.len() {
            for j in 0..a.len() {
                if a[i] - a[j] > 1e-9 {
                    prop_assert!(b[i] > b[j]);
                }
            }
        }
    }

    #[test]
    fn components_match_flood_fill(h in 1usize..20, w in 1usize..20, bits in prop::collection::vec(any::<bool>(), 400)) {
        let mask = &bits[..h * w];
        let mut got = component_areas(mask, w);
        got.sort_unstable();
        prop_assert_eq!(got, flood_fill_areas(mask, h, w));
    }

    #[test]
    fn gate_is_monotone_in_blob_count(
        rects in prop::collection::vec((0usize..30, 0usize..40, 1usize..12, 1usize..12), 0..8),
        diff in 0.05f64..0.9,
        area in 1usize..40,
    ) {
        let (h, w) = (30, 40);
        let mut u = vec![0.0; h * w];
        for &(r0, c0, rh, rw) in &rects {
            for r in r0..(r0 + rh).min(h) {
                for c in c0..(c0 + rw).min(w) {
                    u[r * w + c] = 1.0;
                }
            }
        }
        let flow = FlowField::new(h, w, u, vec![0.0; h * w]).unwrap();
        let mut last = true;
        for count in 0..10 {
            let g = foreground_gate(&flow, 1.0, &GateParams { diff_threshold: diff, min_blob_area: area, min_blob_count: count });
            prop_assert!(!g.keep || last);
            last = g.keep;
        }
    }

    #[test]
    fn flow_shape_and_zero_fixed_point(h in 2usize..12, w in 2usize..12, seed in any::<u64>()) {
        let m = maps_from_seed(seed, 1, h, w, 1).remove(0);
        let f = GrayFrame::from_map(m).unwrap();
        let g = GrayFrame::from_fn(h, w, |r, c| ((r * 3 + c) % 5) as f64 / 4.0).unwrap();
        let flow = compute_flow(&f, &g, &HsParams::default()).unwrap();
        prop_assert_eq!((flow.height(), flow.width()), (h, w));
        let still = compute_flow(&f, &f, &HsParams::default()).unwrap();
        prop_assert!(still.u().iter().chain(still.v()).all(|&x| x == 0.0));
    }

    #[test]
    fn resize_keeps_constants(h in 1usize..10, w in 1usize..10, oh in 1usize..20, ow in 1usize..20, value in 0.0f64..1.0) {
        let m = Map::from_fn(h, w, 3, |_, _, _| value);
        let r = m.resize_bilinear(oh, ow).unwrap();
        prop_assert!(r.data().iter().all(|&x| (x - value).abs() < 1e-12));
        prop_assert_eq!(m.resize_bilinear(h, w).unwrap(), m);
    }
}

#[test]
fn wheel_directions_give_distinct_colors() {
    let wheel = color_wheel();
    let colors: Vec<[f64; 3]> = (0..WHEEL_SIZE)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / WHEEL_SIZE as f64;
            encode_vector(angle.cos(), angle.sin(), 1.0, &wheel)
        })
        .collect();
    for a in 0..WHEEL_SIZE {
        for b in a + 1..WHEEL_SIZE {
            assert_ne!(colors[a], colors[b], "wheel entries {a} and {b} collide");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_text_round_trips(
        alpha in 0.01f64..10.0,
        iters in 1usize..500,
        k in prop::sample::select(vec![1usize, 3, 5]),
        l1 in 1usize..=8,
        lrn in any::<bool>(),
        depth in 1usize..9,
        sigma in 0.01f64..10.0,
        q in 1usize..5000,
        diff in 0.01f64..0.99,
        count in 0usize..6,
        aug in any::<bool>(),
        pixel in any::<bool>(),
        pct in 0.5f64..1.0,
    ) {
        let mut c = PipelineConfig::default();
        c.hs.alpha = alpha;
        c.hs.max_iters = iters;
        c.pcanet.k1 = k;
        c.pcanet.k2 = k;
        c.pcanet.l1 = l1.min(3 * k * k);
        c.pcanet.l2 = l1.min(k * k);
        c.lrn_params.depth = depth;
        c.pcanet.lrn = lrn.then_some(c.lrn_params);
        c.kpca.sigma = sigma;
        c.kpca.q = q;
        c.gate.diff_threshold = diff;
        c.gate.min_blob_count = count;
        c.augment_enabled = aug;
        c.eval_mode = if pixel { EvalMode::PixelLevel } else { EvalMode::FrameLevel };
        c.cap_percentile = pct;
        let text = c.to_text();
        let back = PipelineConfig::from_text(&text).unwrap();
        prop_assert_eq!(back, c);
        prop_assert_eq!(back.to_text(), text);
    }
}

#[test]
fn filter_network_container_round_trip_and_corruption() {
    let maps = maps_from_seed(5, 4, 10, 12, 3);
    let hyper = PcanetHyper { l1: 4, l2: 3, block_h: 5, block_w: 6, lrn: Some(LrnParams::default()), ..PcanetHyper::default() };
    let model = train_pcanet(&maps, &hyper).unwrap();
    let bytes = model.to_bytes();
    let back = PcanetModel::from_bytes(&bytes).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.to_bytes(), bytes);
    for i in (0..bytes.len()).step_by(bytes.len() / 97 + 1) {
        let mut bad = bytes.clone();
        bad[i] ^= 0x10;
        assert!(matches!(PcanetModel::from_bytes(&bad), Err(AedError::Format(_))), "flip at {i} accepted");
    }
    assert!(PcanetModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
}
