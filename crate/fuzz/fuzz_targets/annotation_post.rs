#![no_main]

use std::sync::LazyLock;

use libfuzzer_sys::fuzz_target;
use rebound_cli::serve::{parse_overlay, AnnotationPost};
use rebound_core::formats::manifest;
use rebound_core::{Annotation, Manifest};

static MANIFEST: LazyLock<Manifest> = LazyLock::new(|| {
    manifest::parse(concat!(
        r#"{"id":"a","fps":60,"num_frames":600}"#,
        "\n",
        r#"{"id":"b","fps":30,"num_frames":90,"label":"DREB","event_frame":10}"#,
        "\n",
    ))
    .expect("fixed manifest")
});

fuzz_target!(|data: &[u8]| {
    if let Ok(post) = serde_json::from_slice::<AnnotationPost>(data) {
        if let Some(entry) = MANIFEST.get(&post.video_id) {
            let ann = Annotation { video_id: post.video_id, label: post.label, event_frame: post.event_frame, flags: post.flags };
            if ann.check(&entry.meta).is_ok() {
                // Accepted annotations must reload from the overlay file.
                let line = serde_json::to_string(&ann).expect("serializes");
                let overlay = parse_overlay(&line, &MANIFEST).expect("stored annotation reloads");
                assert_eq!(overlay[&ann.video_id], ann);
            }
        }
    }
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_overlay(text, &MANIFEST);
    }
});
