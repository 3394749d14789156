use std::collections::BTreeMap;

use proptest::prelude::*;
use rebound_core::formats::{ballots, clips, detections, manifest, predictions, scores, splits, truth};
use rebound_core::panel::Ballot;
use rebound_core::sim::{gen_corpus, SimConfig};
use rebound_core::{ClassLabel, Detection, ScoreStream};

fn label() -> impl Strategy<Value = ClassLabel> {
    prop::sample::select(ClassLabel::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}|[{}\":,0-9a-zA-Z_\\[\\]\\n]{0,200}") {
        let _ = manifest::parse(&text);
        let _ = splits::parse(&text);
        let _ = clips::parse(&text);
        let _ = scores::parse(&text, "v", 60.0, 1);
        let _ = scores::parse(&format!("frame,p_dreb,p_oreb,p_bg\n{text}"), "v", 60.0, 1);
        let _ = detections::parse(&text);
        let _ = ballots::parse(&format!("expert_id,video_id,label\n{text}"));
        let _ = predictions::parse(&text);
        let _ = truth::parse(&text);
    }

    #[test]
    fn detections_round_trip(d in prop::collection::vec(("[a-z0-9\"\\\\]{1,8}", any::<u32>(), label(), 0.0f64..=1.0), 0..20)) {
        let dets: Vec<Detection> = d.into_iter().map(|(video_id, frame, label, confidence)| Detection { video_id, frame, label, confidence }).collect();
        prop_assert_eq!(detections::parse(&detections::render(&dets)).unwrap(), dets);
    }

    #[test]
    fn scores_round_trip(r in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.001f64..1.0), 1..50), stride in 1u32..6) {
        let rows = r.into_iter().map(|(a, b, c)| { let s = a + b + c; [a / s, b / s, c / s] }).collect();
        let s = ScoreStream::new("v", 60.0, stride, rows).unwrap();
        prop_assert_eq!(scores::parse(&scores::render(&s), "v", 60.0, stride).unwrap(), s);
    }

    #[test]
    fn ballots_and_predictions_round_trip(v in prop::collection::btree_map("[a-z0-9_]{1,6}", label(), 0..20)) {
        let preds: BTreeMap<String, ClassLabel> = v;
        prop_assert_eq!(predictions::parse(&predictions::render(&preds)).unwrap(), preds.clone());
        let b: Vec<Ballot> = preds.iter().map(|(k, &l)| Ballot { expert_id: "e".into(), video_id: k.clone(), label: l }).collect();
        prop_assert_eq!(ballots::parse(&ballots::render(&b)).unwrap(), b);
    }
}

#[test]
fn simulated_corpus_round_trips() {
    let corpus = gen_corpus(&SimConfig { num_videos: 25, spurious_prob: 0.5, ..Default::default() }).unwrap();
    let text = manifest::render(&corpus.manifest);
    assert_eq!(manifest::parse(&text).unwrap(), corpus.manifest);
    assert_eq!(manifest::render(&manifest::parse(&text).unwrap()), text);
    assert_eq!(truth::parse(&truth::render(&corpus.truth)).unwrap(), corpus.truth);
    for s in &corpus.streams {
        let t = scores::render(s);
        assert_eq!(&scores::parse(&t, s.video_id(), s.fps(), 1).unwrap(), s);
    }
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(&SimConfig { num_videos: 3, ..Default::default() }).unwrap();
    let path = dir.path().join("manifest.jsonl");
    manifest::write(&path, &corpus.manifest).unwrap();
    assert_eq!(rebound_core::data::load_manifest(&path).unwrap(), corpus.manifest);
    let err = manifest::read(dir.path().join("missing.jsonl")).unwrap_err();
    assert!(!err.is_validation());
}
