use std::collections::BTreeMap;

use proptest::prelude::*;
use teachkit_core::envs::expert::writing_expert;
use teachkit_core::envs::EnvSpec;
use teachkit_core::extract::builtin::fit_builtin;
use teachkit_core::extract::import::import_segmentations;
use teachkit_core::extract::time_heuristic::time_heuristic_segments;
use teachkit_core::extract::SkillExtractor;
use teachkit_core::infill::infill_points;
use teachkit_core::io::{
    export_demonstrations, load_demonstrations, parse_segmentations, stroke_record_to_trajectory,
    SegmentationRecord, StrokeRecord,
};
use teachkit_core::validate::validate_trajectory;
use teachkit_core::{AgentTag, ExtractorConfig, Trajectory};

fn writing_demos(count: usize, seed: u64) -> Vec<Trajectory> {
    let env = EnvSpec::writing();
    env.sample_scenarios(count, seed)
        .unwrap()
        .iter()
        .map(|sc| writing_expert(sc, &env).unwrap())
        .collect()
}

fn chebyshev(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

#[test]
fn demonstrations_round_trip_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("demos.json");
    let demos = writing_demos(4, 1);
    export_demonstrations(&demos, &path).unwrap();
    assert_eq!(load_demonstrations(&path).unwrap(), demos);
}

#[test]
fn segmentation_without_boundaries_is_rejected() {
    let err = parse_segmentations(r#"[{"trajectory_id": "a", "skills": [1]}]"#).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("record 0") && msg.contains("boundaries"), "{msg}");
}

#[test]
fn stroke_records_become_valid_writing_trajectories() {
    let env = EnvSpec::writing();
    let rec = StrokeRecord {
        id: "pad-1".into(),
        glyphs: vec!["ka".into()],
        strokes: vec![vec![[10.0, 10.0], [30.0, 12.0]], vec![[31.0, 40.0], [12.0, 60.0]]],
        agent_tag: AgentTag::Student,
    };
    let t = stroke_record_to_trajectory(&rec, &env).unwrap();
    let report = validate_trajectory(&t, &env).unwrap();
    assert!(report.passed(), "{report}");
    let pts: Vec<[f64; 2]> = t.states().iter().map(|s| [s[0], s[1]]).collect();
    assert!(pts.windows(2).all(|w| chebyshev(w[0], w[1]) <= 1.0 + 1e-9));
    assert!(t.reward < 0.0);
}

#[test]
fn imported_labels_are_returned_verbatim() {
    let demos = writing_demos(6, 2);
    let cfg = ExtractorConfig::writing();
    let records: Vec<SegmentationRecord> = demos
        .iter()
        .map(|d| {
            let seg = time_heuristic_segments(d.len(), 3).unwrap();
            SegmentationRecord {
                trajectory_id: d.id.clone(),
                skills: vec![5, 1, 5],
                boundaries: seg.boundaries,
            }
        })
        .collect();
    let ex = import_segmentations(&records, &demos, &cfg).unwrap();
    for (d, r) in demos.iter().zip(&records) {
        assert_eq!(ex.extract(d).unwrap(), r.segmentation());
        // The same actions under another id still hit the stored labels.
        let mut twin = d.clone();
        twin.id = "student/copy".into();
        twin.agent_tag = AgentTag::Student;
        assert_eq!(ex.extract(&twin).unwrap(), r.segmentation());
    }

    let mut short = records.clone();
    *short[2].boundaries.last_mut().unwrap() -= 1;
    let err = import_segmentations(&short, &demos, &cfg).unwrap_err().to_string();
    assert!(err.contains(&demos[2].id), "{err}");
}

#[test]
fn builtin_extractor_is_deterministic_and_respects_segment_bounds() {
    let demos = writing_demos(30, 3);
    let cfg = ExtractorConfig::writing();
    let a = fit_builtin(&demos, &cfg, 9).unwrap();
    let b = fit_builtin(&demos, &cfg, 9).unwrap();
    for d in &demos {
        let s = a.extract(d).unwrap();
        assert_eq!(s, b.extract(d).unwrap());
        s.check(d.len(), cfg.latent_dim).unwrap();
        if d.len() >= cfg.h_min {
            for (_, start, end) in s.segments() {
                let l = end - start;
                assert!(l >= cfg.h_min.min(d.len()) && l <= cfg.h_max, "segment of {l} steps");
            }
        }
    }
}

#[test]
fn builtin_extractor_ignores_demo_order() {
    let demos = writing_demos(30, 4);
    let mut rev = demos.clone();
    rev.reverse();
    let cfg = ExtractorConfig::writing();
    let a = fit_builtin(&demos, &cfg, 1).unwrap();
    let b = fit_builtin(&rev, &cfg, 1).unwrap();
    let la: BTreeMap<_, _> = demos.iter().map(|d| (d.id.clone(), a.extract(d).unwrap())).collect();
    let lb: BTreeMap<_, _> = demos.iter().map(|d| (d.id.clone(), b.extract(d).unwrap())).collect();
    assert_eq!(la, lb);
}

proptest! {
    #[test]
    fn infill_bounds_gaps_and_keeps_endpoints(
        pts in prop::collection::vec((0.0..200.0f64, 0.0..100.0f64), 1..20),
        th in 0.5..5.0f64,
    ) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        let dense = infill_points(&pts, th);
        prop_assert_eq!(dense.first(), pts.first());
        prop_assert_eq!(dense.last(), pts.last());
        prop_assert!(dense.windows(2).all(|w| chebyshev(w[0], w[1]) <= th + 1e-9));
        prop_assert_eq!(infill_points(&dense, th), dense);
    }

    #[test]
    fn time_heuristic_partitions_every_length(len in 1usize..500, k in 1usize..12) {
        match time_heuristic_segments(len, k) {
            Ok(s) => {
                s.check(len, k).unwrap();
                prop_assert_eq!(s.num_segments(), k);
                let lens: Vec<usize> = s.segments().map(|(_, a, b)| b - a).collect();
                prop_assert!(lens.iter().max().unwrap() - lens.iter().min().unwrap() <= 1);
            }
            Err(_) => prop_assert!(len < k),
        }
    }
}
