mod common;

use proptest::prelude::*;
use teachkit_core::session::{read_log, replay_log, Event};
use teachkit_serve::engine::SessionRequest;

#[derive(Clone, Debug)]
enum Input {
    Action(f64, f64),
    Malformed,
    PenUp,
}

fn input() -> impl Strategy<Value = Input> {
    prop_oneof![
        8 => (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Input::Action(a, b)),
        1 => Just(Input::Malformed),
        1 => Just(Input::PenUp),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn any_input_stream_replays_exactly(inputs in proptest::collection::vec(input(), 1..400), writing in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let e = common::engine(dir.path());
        let env = if writing { "writing" } else { "parking" };
        let c = e.create_session(&SessionRequest {
            username: "p".into(),
            env: env.into(),
            setting: "skills".into(),
            seed: 3,
        }).unwrap();
        let scale = if writing { 3.0 } else { 1.0 };
        for i in &inputs {
            let r = match i {
                Input::Action(a, b) => e.action(&c.session_id, &[a * scale, b * scale]),
                Input::Malformed => e.action(&c.session_id, &[1.0]),
                Input::PenUp => e.pen_up(&c.session_id),
            };
            if r.is_err() {
                break;
            }
        }
        let log = read_log(&dir.path().join("sessions").join(format!("{}.jsonl", c.session_id))).unwrap();
        let session = replay_log(&log).unwrap();
        for w in log.windows(2) {
            prop_assert!(w[0].tick <= w[1].tick);
            prop_assert_eq!(w[0].seq + 1, w[1].seq);
        }
        for r in &log {
            if let Event::RoundStart { round } = &r.event {
                prop_assert!(round.time_limit > 0 || !round.phase.is_interactive());
            }
        }
        prop_assert!(session.rounds.iter().all(|r| r.reward <= 0.0));
    }
}
