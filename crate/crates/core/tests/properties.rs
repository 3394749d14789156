use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rebound_core::data::{make_splits, validate_annotations, GroundTruth, SplitSizes};
use rebound_core::metrics::{accuracy, average_precision, bce_loss, confusion, map_at, prf1, weighted_ce_frames, ClassWeights};
use rebound_core::panel::{compare, majority_vote, Ballot, MetricDelta};
use rebound_core::postprocess::{frames_to_candidates, nms, run_pipeline, smooth, threshold, NmsMode, PostProcessConfig};
use rebound_core::pseudolabel::{filter_confidence, filter_single, run_filter, PseudoFilterConfig};
use rebound_core::sampling::{downsample_indices, sample_online, trim_offline, PastEventPolicy, SamplingConfig, TrimOutcome};
use rebound_core::sim::{gen_stream, BumpShape, SimConfig};
use rebound_core::{Annotation, ClassLabel, Detection, Flag, Manifest, ManifestEntry, Provenance, ScoreStream, VideoMeta};

const ACTIONS: [ClassLabel; 2] = ClassLabel::ACTIONS;

fn action() -> impl Strategy<Value = ClassLabel> {
    prop::sample::select(ACTIONS.to_vec())
}

fn any_label() -> impl Strategy<Value = ClassLabel> {
    prop::sample::select(ClassLabel::ALL.to_vec())
}

/// Random stochastic rows.
fn rows(len: impl Into<prop::collection::SizeRange>) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.001f64..1.0), len).prop_map(|v| {
        v.into_iter()
            .map(|(a, b, c)| {
                let s = a + b + c;
                [a / s, b / s, c / s]
            })
            .collect()
    })
}

/// Streams with a few strong bumps on top of random rows.
fn bumpy_stream() -> impl Strategy<Value = ScoreStream> {
    (any::<u64>(), 0.0f64..0.02, 0.7f64..1.0, prop::sample::select(vec![BumpShape::Triangular, BumpShape::Gaussian, BumpShape::FlatTop]), 0.0f64..1.0)
        .prop_map(|(seed, noise, peak, shape, spurious_prob)| {
            let cfg = SimConfig { seed, noise, peak, shape, spurious_prob, ..Default::default() };
            gen_stream(&cfg, (seed % 97) as usize).unwrap().stream
        })
}

fn manifest_strategy() -> impl Strategy<Value = Manifest> {
    prop::collection::vec((prop::option::of(action()), any::<bool>(), any::<bool>(), any::<bool>()), 1..80).prop_map(|specs| {
        let entries = specs.into_iter().enumerate().map(|(i, (label, timed, mislabeled, pseudo))| {
            let meta = VideoMeta::new(format!("v{i:03}"), 60, 600).unwrap();
            let annotation = label.map(|l| {
                let mut a = Annotation::new(meta.id.clone(), l, 300);
                if !timed {
                    a.event_frame = None;
                }
                if mislabeled {
                    a = a.with_flag(Flag::Mislabeled);
                }
                a
            });
            let provenance = if pseudo { Provenance::Pseudo } else { Provenance::Manual };
            ManifestEntry { meta, annotation, provenance }
        });
        Manifest::new(entries).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // ---- core-data ----

    #[test]
    fn validation_counts_cover_every_video(m in manifest_strategy()) {
        let r = validate_annotations(&m);
        prop_assert_eq!(r.valid + r.excluded.len() + r.unannotated.len(), m.len());
        prop_assert_eq!(r.class_counts.total(), r.valid);
    }

    #[test]
    fn splits_partition_eligible_videos(m in manifest_strategy(), seed in any::<u64>(), balanced in any::<bool>(), frac in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)) {
        let gts: Vec<_> = m.ground_truths();
        let manual = m.entries().iter().filter(|e| e.ground_truth().is_some() && e.provenance == Provenance::Manual).count();
        let test = (manual as f64 * frac.0 * 0.5) as usize;
        let val = ((manual - test) as f64 * frac.1 * 0.5) as usize;
        let train = ((gts.len() - test - val) as f64 * frac.2) as usize;
        let sizes = SplitSizes::new(train, val, test);
        if let Ok(s) = make_splits(&m, "p", sizes, balanced, seed) {
            prop_assert!(s.overlaps().is_empty());
            let all: Vec<&String> = s.all_ids().collect();
            let unique: BTreeSet<&String> = all.iter().copied().collect();
            prop_assert_eq!(all.len(), unique.len());
            prop_assert_eq!((s.train.len(), s.val.len(), s.test.len()), (train, val, test));
            for id in all {
                let e = m.get(id).unwrap();
                prop_assert!(e.ground_truth().is_some());
                prop_assert!(!e.annotation.as_ref().unwrap().is_mislabeled());
            }
            for id in s.val.iter().chain(&s.test) {
                prop_assert_eq!(m.get(id).unwrap().provenance, Provenance::Manual);
            }
            if balanced {
                for (_, c) in s.class_counts(&m) {
                    prop_assert!(c.dreb.abs_diff(c.oreb) <= 1);
                }
            }
            prop_assert_eq!(make_splits(&m, "p", sizes, balanced, seed).unwrap(), s);
        }
    }

    // ---- sampling ----

    #[test]
    fn zero_overlap_tiles_without_gaps(frames in 60u32..2000, clip in 0.1f64..3.0, aw in 0.1f64..2.0) {
        let cfg = SamplingConfig { clip_len_s: clip, aw_len_s: aw, overlap: 0.0, past_event_policy: PastEventPolicy::Background, ..Default::default() };
        let video = VideoMeta::new("v", 60, frames).unwrap();
        if let Ok(clips) = sample_online(&video, None, &cfg) {
            prop_assert_eq!(clips[0].start_frame, 0);
            for w in clips.windows(2) {
                prop_assert_eq!(w[0].context_end(), w[1].start_frame);
            }
            let last = clips.last().unwrap();
            prop_assert!(video.num_frames - last.context_end() < last.context_len);
        }
    }

    #[test]
    fn consecutive_clips_overlap_by_clip_minus_step(frames in 200u32..2000, clip in 0.2f64..3.0, overlap in 0.0f64..0.95) {
        let cfg = SamplingConfig { clip_len_s: clip, overlap, past_event_policy: PastEventPolicy::Background, ..Default::default() };
        let video = VideoMeta::new("v", 60, frames).unwrap();
        if let Ok(clips) = sample_online(&video, None, &cfg) {
            let len = clips[0].context_len;
            let geo = cfg.geometry(60).unwrap();
            for w in clips.windows(2) {
                let inter = w[0].context_end().saturating_sub(w[1].start_frame);
                prop_assert_eq!(inter, len.saturating_sub(geo.step));
                let exact = f64::from(len) * overlap;
                if (exact.fract() - 0.5).abs() > 1e-9 && geo.step < len {
                    prop_assert_eq!(inter, exact.round() as u32);
                }
            }
        }
    }

    #[test]
    fn offline_trim_never_leaks(frames in 1u32..2000, event in 0u32..2000, tau in 0.0f64..4.0, stride in 1u32..8, label in action()) {
        let event = event % frames;
        let video = VideoMeta::new("v", 60, frames).unwrap();
        let gt = GroundTruth { video_id: "v".into(), label, frame: event };
        let limit = f64::from(event) - tau * 60.0;
        match trim_offline(&video, &gt, tau, stride).unwrap() {
            TrimOutcome::Clip(c) => {
                for i in downsample_indices(c.context_end(), stride).unwrap() {
                    prop_assert!(f64::from(i) < limit.round_ties_even());
                }
                prop_assert_eq!(c.aw_start + c.aw_len, event + 1);
            }
            TrimOutcome::Removed => prop_assert!(limit.round_ties_even() <= 0.0),
        }
    }

    #[test]
    fn online_labels_match_brute_force_scan(frames in 120u32..1500, event in 0u32..1500, clip in 0.2f64..2.0, aw in 0.1f64..2.0, overlap in 0.0f64..0.9, label in action()) {
        let event = event % frames;
        let cfg = SamplingConfig { clip_len_s: clip, aw_len_s: aw, overlap, ..Default::default() };
        let video = VideoMeta::new("v", 60, frames).unwrap();
        let gt = GroundTruth { video_id: "v".into(), label, frame: event };
        if let Ok(clips) = sample_online(&video, Some(&gt), &cfg) {
            let geo = cfg.geometry(60).unwrap();
            let mut expected = 0;
            let mut s = 0;
            while s + geo.clip_frames <= frames {
                let aw_start = s + geo.clip_frames;
                if event >= aw_start && event < (aw_start + geo.aw_frames).min(frames) {
                    expected += 1;
                }
                s += geo.step;
            }
            prop_assert_eq!(clips.iter().filter(|c| c.label != ClassLabel::Background).count(), expected);
            prop_assert!(clips.iter().all(|c| !(c.start_frame..c.context_end()).contains(&event)));
        }
    }

    // ---- postprocess ----

    #[test]
    fn smoothing_keeps_rows_stochastic(r in rows(1..300), w in prop::sample::select(vec![1usize, 3, 5, 7, 9, 15])) {
        let s = ScoreStream::new("v", 60.0, 1, r).unwrap();
        let out = smooth(&s, w).unwrap();
        prop_assert_eq!(out.len(), s.len());
        for row in out.scores() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn threshold_is_idempotent(r in rows(1..200), theta in 0.0f64..1.0) {
        let s = ScoreStream::new("v", 60.0, 2, r).unwrap();
        let once = threshold(&s, theta);
        prop_assert_eq!(threshold(&once, theta), once);
    }

    #[test]
    fn nms_spacing_and_idempotence(s in bumpy_stream(), window in 0.1f64..5.0, per_class in any::<bool>()) {
        let mode = if per_class { NmsMode::PerClass } else { NmsMode::Joint };
        let cands = frames_to_candidates(&threshold(&smooth(&s, 7).unwrap(), 0.5));
        let kept = nms(&cands, window, s.fps(), mode);
        let half = window * s.fps() / 2.0;
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                if mode == NmsMode::Joint || a.label == b.label {
                    prop_assert!(f64::from(a.frame.abs_diff(b.frame)) > half);
                }
            }
        }
        prop_assert_eq!(nms(&kept, window, s.fps(), mode), kept.clone());
    }

    #[test]
    fn pipeline_is_stage_composition(s in bumpy_stream(), theta in 0.3f64..0.95) {
        let cfg = PostProcessConfig { threshold: theta, ..Default::default() };
        let staged = nms(&frames_to_candidates(&threshold(&smooth(&s, cfg.smooth_window).unwrap(), theta)), cfg.nms_window_s, s.fps(), cfg.nms_mode);
        prop_assert_eq!(run_pipeline(&s, &cfg).unwrap(), staged);
    }

    #[test]
    fn background_padding_far_from_detections_is_invisible(s in bumpy_stream(), left in 0usize..300, right in 0usize..300) {
        let cfg = PostProcessConfig::default();
        let dets = run_pipeline(&s, &cfg).unwrap();
        let margin = (cfg.nms_window_s * s.fps() / 2.0) as u32 + 4;
        let last = s.frame_of_row(s.len() - 1);
        prop_assume!(dets.iter().all(|d| d.frame > margin && d.frame + margin < last));
        let mut padded = vec![[0.0, 0.0, 1.0]; left];
        padded.extend_from_slice(s.scores());
        padded.extend(std::iter::repeat_n([0.0, 0.0, 1.0], right));
        let p = ScoreStream::new(s.video_id(), s.fps(), s.stride(), padded).unwrap();
        let shift = left as u32 * s.stride();
        let shifted: Vec<Detection> = run_pipeline(&p, &cfg).unwrap().into_iter().map(|mut d| { d.frame -= shift; d }).collect();
        prop_assert_eq!(shifted, dets);
    }

    #[test]
    fn simulated_rows_sum_to_one(s in bumpy_stream()) {
        for row in s.scores() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}

fn detections() -> impl Strategy<Value = Vec<Detection>> {
    prop::collection::vec((0u32..3, 0u32..600, action(), 0.0f64..1.0), 0..12).prop_map(|v| {
        v.into_iter()
            .map(|(vid, frame, label, confidence)| Detection { video_id: format!("v{vid}"), frame, label, confidence })
            .collect()
    })
}

fn ground_truths() -> impl Strategy<Value = Vec<GroundTruth>> {
    prop::collection::vec((0u32..3, 0u32..600, action()), 0..6)
        .prop_map(|v| v.into_iter().map(|(vid, frame, label)| GroundTruth { video_id: format!("v{vid}"), label, frame }).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // ---- metrics ----

    #[test]
    fn ap_is_scale_invariant(d in detections(), g in ground_truths(), k in 0.01f64..1.0) {
        let scaled: Vec<Detection> = d.iter().cloned().map(|mut x| { x.confidence *= k; x }).collect();
        for c in ACTIONS {
            prop_assert_eq!(average_precision(&d, &g, c, 1.0, 60.0), average_precision(&scaled, &g, c, 1.0, 60.0));
        }
        prop_assert_eq!(map_at(&d, &g, &[1.0, 2.0], 60.0).map_per_delta, map_at(&scaled, &g, &[1.0, 2.0], 60.0).map_per_delta);
    }

    #[test]
    fn ap_is_monotone_in_delta(d in detections(), g in ground_truths()) {
        let t = map_at(&d, &g, &[0.25, 1.0, 2.0, 3.0, 5.0, 25.0], 60.0);
        for row in &t.ap {
            for w in row.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn huge_delta_reduces_ap_to_ranking(d in detections(), g in ground_truths()) {
        // With every GT reachable, a detection is a hit iff its video still has an unmatched GT of its class.
        for c in ACTIONS {
            let ap = average_precision(&d, &g, c, 1000.0, 60.0);
            let mut ds: Vec<&Detection> = d.iter().filter(|x| x.label == c).collect();
            ds.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
            let gs: Vec<&GroundTruth> = g.iter().filter(|x| x.label == c).collect();
            if gs.is_empty() {
                prop_assert_eq!(ap, 0.0);
                continue;
            }
            let mut left: BTreeMap<&str, usize> = BTreeMap::new();
            for x in &gs {
                *left.entry(x.video_id.as_str()).or_default() += 1;
            }
            let mut hits = 0usize;
            let mut best_after = vec![0.0f64; ds.len() + 1];
            let mut prec = Vec::new();
            let mut is_hit = Vec::new();
            for (k, x) in ds.iter().enumerate() {
                let slot = left.entry(x.video_id.as_str()).or_default();
                let hit = *slot > 0;
                if hit { *slot -= 1; hits += 1; }
                prec.push(hits as f64 / (k + 1) as f64);
                is_hit.push(hit);
            }
            for k in (0..ds.len()).rev() {
                best_after[k] = best_after[k + 1].max(prec[k]);
            }
            let expected: f64 = (0..ds.len()).filter(|&k| is_hit[k]).map(|k| best_after[k] / gs.len() as f64).sum();
            prop_assert!((ap - expected).abs() < 1e-12, "ap {} expected {}", ap, expected);
        }
    }

    #[test]
    fn prf1_accuracy_matches_accuracy(pairs in prop::collection::vec((any_label(), any_label()), 1..100)) {
        let (p, g): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let cm = confusion(&p, &g, &ClassLabel::ALL).unwrap();
        prop_assert_eq!(prf1(&cm).accuracy, accuracy(&p, &g).unwrap());
    }

    #[test]
    fn bce_is_nonnegative(pairs in prop::collection::vec((any::<bool>(), 0.0f64..=1.0), 1..50)) {
        let (y, p): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        prop_assert!(bce_loss(&y, &p).unwrap() >= 0.0);
        let exact: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        prop_assert!(bce_loss(&y, &exact).unwrap() < 1e-6);
    }

    #[test]
    fn frame_loss_rebatches(videos in prop::collection::vec(prop::collection::vec((any_label(), 0.01f64..1.0, 0.01f64..1.0, 0.01f64..1.0), 1..40), 1..12), cuts in prop::collection::vec(any::<bool>(), 12)) {
        let targets: Vec<Vec<ClassLabel>> = videos.iter().map(|v| v.iter().map(|x| x.0).collect()).collect();
        let probs: Vec<Vec<[f64; 3]>> = videos.iter().map(|v| v.iter().map(|&(_, a, b, c)| { let s = a + b + c; [a / s, b / s, c / s] }).collect()).collect();
        let whole = weighted_ce_frames(&targets, &probs, ClassWeights::FRAME).unwrap();
        let mut acc = 0.0;
        let mut frames = 0usize;
        let mut start = 0;
        for end in 1..=targets.len() {
            if end == targets.len() || cuts[end - 1] {
                let n: usize = targets[start..end].iter().map(Vec::len).sum();
                acc += weighted_ce_frames(&targets[start..end], &probs[start..end], ClassWeights::FRAME).unwrap() * n as f64;
                frames += n;
                start = end;
            }
        }
        prop_assert!((acc / frames as f64 - whole).abs() < 1e-12);
    }

    // ---- pseudolabel ----

    #[test]
    fn single_and_confidence_filters_commute(d in detections(), min_conf in 0.0f64..1.0) {
        let mut grouped: BTreeMap<String, Vec<Detection>> = (0..3).map(|i| (format!("v{i}"), Vec::new())).collect();
        for x in &d {
            grouped.get_mut(&x.video_id).unwrap().push(x.clone());
        }
        let single_first: BTreeSet<String> = filter_confidence(filter_single(&grouped, 1).survivors.into_values().collect(), min_conf).0.into_iter().map(|x| x.video_id).collect();
        let confident_videos: BTreeMap<String, Vec<Detection>> = grouped.iter().filter(|(_, v)| v.iter().all(|x| x.confidence >= min_conf)).map(|(k, v)| (k.clone(), v.clone())).collect();
        let conf_first: BTreeSet<String> = filter_single(&confident_videos, 1).survivors.into_keys().collect();
        prop_assert_eq!(single_first, conf_first);
    }

    #[test]
    fn pseudo_output_is_balanced_subset(n in 2usize..60, d in prop::collection::vec((0usize..60, 0u32..600, action(), 0.95f64..1.0), 0..80), seed in any::<u64>()) {
        let videos: Vec<VideoMeta> = (0..n).map(|i| VideoMeta::new(format!("u{i}"), 60, 600).unwrap()).collect();
        let classes: BTreeMap<String, ClassLabel> = videos.iter().enumerate().map(|(i, v)| (v.id.clone(), ACTIONS[i % 2])).collect();
        let dets: Vec<Detection> = d.into_iter().map(|(v, frame, label, confidence)| Detection { video_id: format!("u{}", v % n), frame, label, confidence }).collect();
        let cfg = PseudoFilterConfig { seed, ..Default::default() };
        let out = run_filter(&dets, &videos, &classes, &cfg).unwrap();
        let after = &out.stats.per_class_after;
        prop_assert_eq!(after[&ClassLabel::Dreb], after[&ClassLabel::Oreb]);
        for e in out.manifest.entries() {
            let gt = e.ground_truth().unwrap();
            prop_assert!(dets.iter().any(|x| x.video_id == gt.video_id && x.frame == gt.frame));
            prop_assert_eq!(gt.label, classes[&gt.video_id]);
        }
        let again = run_filter(&dets, &videos, &classes, &cfg).unwrap();
        prop_assert_eq!(again.manifest, out.manifest);
        prop_assert_eq!(again.stats, out.stats);
    }

    // ---- expert panel ----

    #[test]
    fn majority_vote_ignores_ballot_order(votes in prop::collection::vec(prop::collection::vec(action(), 5), 1..20), perm_seed in any::<u64>()) {
        let mut ballots: Vec<Ballot> = votes.iter().enumerate().flat_map(|(v, vs)| vs.iter().enumerate().map(move |(e, &label)| Ballot { expert_id: format!("e{e}"), video_id: format!("v{v}"), label })).collect();
        let a = majority_vote(&ballots, 5).unwrap();
        let n = ballots.len();
        let mut x = perm_seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ballots.swap(i, (x >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(majority_vote(&ballots, 5).unwrap(), a);
    }

    #[test]
    fn compare_deltas_are_metric_differences(rows in prop::collection::vec((action(), action(), action()), 1..60)) {
        let gts: BTreeMap<String, ClassLabel> = rows.iter().enumerate().map(|(i, r)| (format!("v{i:02}"), r.0)).collect();
        let ai: BTreeMap<String, ClassLabel> = rows.iter().enumerate().map(|(i, r)| (format!("v{i:02}"), r.1)).collect();
        let ballots: Vec<Ballot> = rows.iter().enumerate().map(|(i, r)| Ballot { expert_id: "x".into(), video_id: format!("v{i:02}"), label: r.2 }).collect();
        let panel = majority_vote(&ballots, 1).unwrap();
        prop_assert_eq!(panel.labels(), rows.iter().enumerate().map(|(i, r)| (format!("v{i:02}"), r.2)).collect::<BTreeMap<_, _>>());
        let c = compare(&ai, &panel, &gts, ClassLabel::Oreb).unwrap();
        let d = MetricDelta::between(&c.ai_summary, &c.human_summary);
        prop_assert!((c.delta.f1 - d.f1).abs() < 1e-12);
        let truth: Vec<_> = gts.values().copied().collect();
        let hum: Vec<_> = panel.labels().values().copied().collect();
        let aip: Vec<_> = ai.values().copied().collect();
        prop_assert!((c.delta.accuracy - (accuracy(&aip, &truth).unwrap() - accuracy(&hum, &truth).unwrap())).abs() < 1e-12);
    }
}
