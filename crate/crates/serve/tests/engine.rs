mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use common::{engine, parking_assets, writing_assets, Client};
use teachkit_core::curriculum::drills::drill_ngrams;
use teachkit_core::curriculum::{expertise_from_labels, ngram_frequencies, Setting};
use teachkit_core::envs::EnvSpec;
use teachkit_core::extract::SkillExtractor;
use teachkit_core::session::{read_log, replay_log, EndReason, Event, Phase, PENDING};
use teachkit_core::validate::validate_trajectory;
use teachkit_serve::engine::SessionRequest;
use teachkit_serve::plan::build_plan;
use teachkit_serve::{ServeError, ServerMsg};

fn req(user: &str, env: &str, setting: &str, seed: u64) -> SessionRequest {
    SessionRequest {
        username: user.into(),
        env: env.into(),
        setting: setting.into(),
        seed,
    }
}

#[test]
fn skills_plan_is_three_skills_three_sessions_each() {
    for a in [parking_assets(), writing_assets()] {
        let plan = build_plan(a, Setting::Skills, 3).unwrap();
        let practice: Vec<_> = plan
            .practice
            .as_ref()
            .unwrap()
            .iter()
            .filter(|r| r.phase == Phase::Practice)
            .collect();
        assert_eq!(practice.len(), 9);
        let labels: BTreeSet<&str> = practice.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels.len(), 3);
        for l in &labels {
            assert_eq!(practice.iter().filter(|r| r.label == *l).count(), 3);
        }
        assert_eq!(plan.pretest.len(), 2);
        assert_eq!(plan.evaluation.len(), 5);
        for r in &practice {
            assert!(r.overlay.len() >= 2, "practice rounds carry an overlay");
        }
    }
}

#[test]
fn plans_are_deterministic_in_the_seed() {
    for s in Setting::ALL {
        let a = build_plan(parking_assets(), s, 11).unwrap();
        assert_eq!(a, build_plan(parking_assets(), s, 11).unwrap());
    }
    let a = build_plan(parking_assets(), Setting::Skills, 11).unwrap();
    let b = build_plan(parking_assets(), Setting::Skills, 12).unwrap();
    assert_ne!(a, b);
}

#[test]
fn practice_budget_is_equal_across_settings() {
    for a in [parking_assets(), writing_assets()] {
        for s in [Setting::FullTrajectory, Setting::Skills, Setting::TimeHeuristic, Setting::Drills] {
            let plan = build_plan(a, s, 5).unwrap();
            assert_eq!(plan.practice_steps(), Some(a.config.budget), "{s} on {}", a.env.name());
        }
        let ind = build_plan(a, Setting::IndDrills, 5).unwrap();
        assert_eq!(ind.practice, None);
        assert!(ind.entries().iter().any(|e| e.label == PENDING));
    }
}

#[test]
fn ind_drills_target_the_weakest_pretest_skills() {
    let dir = tempfile::tempdir().unwrap();
    let e = engine(dir.path());
    let env = EnvSpec::parking();
    let c = e.create_session(&req("ind", "parking", "ind_drills", 21)).unwrap();
    assert!(c.plan.iter().any(|p| p.label == PENDING));
    let mut client = Client::new(0.6, 4);
    client.run(&e, &c, &env);

    let log = read_log(&e.session(&c.session_id).unwrap().lock().unwrap().log_path().to_path_buf()).unwrap();
    let session = replay_log(&log).unwrap();
    let a = parking_assets();

    // Independent recomputation from the replayed pretest attempts.
    let pre: Vec<_> = session.rounds_in(Phase::Pretest).collect();
    assert_eq!(pre.len(), 2);
    let mut student = BTreeMap::new();
    let mut rewards = BTreeMap::new();
    let mut ids = Vec::new();
    for r in &pre {
        let t = r.trajectory.as_ref().unwrap();
        ids.push(t.scenario.id.clone());
        student.insert(t.scenario.id.clone(), a.extractor.extract(t).unwrap().skills);
        rewards.insert(t.scenario.id.clone(), t.reward);
    }
    ids.sort();
    let mut ev = expertise_from_labels(&ids, &a.labels, &student, &rewards, a.extractor.latent_dim()).unwrap();
    let table = ngram_frequencies(a.labels.values(), a.config.drill.n).unwrap();
    ev.scores
        .retain(|&m, _| !drill_ngrams(&table, &a.extractor.library, m, 1).is_empty());
    let want = ev.lowest(3);
    assert_eq!(session.targets.as_deref(), Some(want.as_slice()));

    // Resolution happens right after the pretest and every practice round
    // is a drill on one of the targets.
    let resolved_at = log.iter().position(|r| matches!(r.event, Event::PlanResolved { .. })).unwrap();
    let last_pre = log
        .iter()
        .rposition(|r| matches!(&r.event, Event::RoundEnd { round, .. } if *round == pre[1].spec.index))
        .unwrap();
    assert_eq!(resolved_at, last_pre + 1);
    let practice: Vec<_> = session.rounds_in(Phase::Practice).collect();
    assert!(!practice.is_empty());
    for r in &practice {
        let m: usize = r.spec.label[6..8].parse().unwrap();
        assert!(want.contains(&m), "{} targets {m}", r.spec.label);
    }
    let drills: BTreeSet<&str> = practice.iter().map(|r| r.spec.label.as_str()).collect();
    assert!(drills.len() <= 2 * want.len());
    let total: usize = practice.iter().map(|r| r.spec.time_limit).sum();
    assert_eq!(total, a.config.budget);
}

#[test]
fn writing_round_ends_on_pen_up_or_timer() {
    let dir = tempfile::tempdir().unwrap();
    let e = engine(dir.path());
    let c = e.create_session(&req("pen", "writing", "skills", 2)).unwrap();
    let id = &c.session_id;
    e.action(id, &[1.0, 0.5]).unwrap();
    let msgs = e.pen_up(id).unwrap();
    let score = msgs.iter().find_map(|m| match m {
        ServerMsg::Score { round, value, .. } => Some((*round, *value)),
        _ => None,
    });
    assert_eq!(score.map(|s| s.0), Some(0));
    assert!(score.unwrap().1 <= 0.0);

    // Second pretest round: run the timer out.
    let st = e.status(id).unwrap();
    assert_eq!(st.round, Some(1));
    let limit2 = st.steps_left.unwrap();
    let mut last = Vec::new();
    for _ in 0..limit2 {
        last = e.action(id, &[0.0, 0.0]).unwrap();
    }
    let end = last.iter().find_map(|m| match m {
        ServerMsg::Score { round, value, .. } => Some((*round, *value)),
        _ => None,
    });
    assert_eq!(end.map(|s| s.0), Some(1));
    let log = read_log(&dir.path().join("sessions").join(format!("{id}.jsonl"))).unwrap();
    let reasons: Vec<EndReason> = log
        .iter()
        .filter_map(|r| match &r.event {
            Event::RoundEnd { reason, .. } => Some(*reason),
            _ => None,
        })
        .collect();
    assert_eq!(&reasons[..2], &[EndReason::PenUp, EndReason::Timer]);
    let steps_left: Vec<usize> = log
        .iter()
        .filter_map(|r| match &r.event {
            Event::Step { round: 1, steps_left, .. } => Some(*steps_left),
            _ => None,
        })
        .collect();
    assert_eq!(steps_left.last(), Some(&0));
    assert!(steps_left.windows(2).all(|w| w[1] + 1 == w[0]));
}

#[test]
fn timer_expiry_scores_the_current_state() {
    let dir = tempfile::tempdir().unwrap();
    let e = engine(dir.path());
    let c = e.create_session(&req("timer", "parking", "skills", 2)).unwrap();
    let env = EnvSpec::parking();
    let mut states = vec![c.round.scenario.initial_state.clone()];
    let mut score = None;
    for _ in 0..c.round.time_limit {
        let msgs = e.action(&c.session_id, &[0.3, 0.2]).unwrap();
        for m in &msgs {
            match m {
                ServerMsg::State { state, round: 0, .. } => states.push(teachkit_core::StateVector(state.clone())),
                ServerMsg::Score { value, .. } => score = Some(*value),
                _ => {}
            }
        }
        if score.is_some() {
            break;
        }
    }
    assert_eq!(states.len(), c.round.time_limit + 1);
    assert_eq!(score, Some(env.scenario_reward(&c.round.scenario, &states)));
}

#[test]
fn malformed_actions_are_logged_and_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let e = engine(dir.path());
    let c = e.create_session(&req("bad", "parking", "drills", 2)).unwrap();
    let id = &c.session_id;
    let before = e.status(id).unwrap();
    for bad in [vec![1.0], vec![0.0, f64::NAN], vec![0.1, 0.2, 0.3]] {
        let msgs = e.action(id, &bad).unwrap();
        assert!(matches!(msgs.as_slice(), [ServerMsg::Rejected { .. }]));
    }
    e.reject(id, "malformed message").unwrap();
    assert!(matches!(e.pen_up(id).unwrap().as_slice(), [ServerMsg::Rejected { .. }]));
    assert_eq!(e.status(id).unwrap(), before);
    let log = read_log(&dir.path().join("sessions").join(format!("{id}.jsonl"))).unwrap();
    let rejected = log.iter().filter(|r| matches!(r.event, Event::Rejected { .. })).count();
    assert_eq!(rejected, 5);
    assert!(replay_log(&log).is_ok());
}

#[test]
fn session_lifecycle_errors() {
    let dir = tempfile::tempdir().unwrap();
    let e = engine(dir.path());
    assert!(matches!(
        e.create_session(&req("u", "parking", "lectures", 1)),
        Err(ServeError::UnknownSetting(_))
    ));
    assert!(matches!(
        e.create_session(&req("u", "juggling", "skills", 1)),
        Err(ServeError::UnknownEnv(_))
    ));
    assert!(matches!(
        e.create_session(&req("no spaces", "parking", "skills", 1)),
        Err(ServeError::InvalidUsername(_))
    ));
    let c = e.create_session(&req("u", "parking", "skills", 1)).unwrap();
    assert!(matches!(
        e.create_session(&req("u", "writing", "drills", 2)),
        Err(ServeError::DuplicateSession(_))
    ));
    let id = &c.session_id;
    assert!(matches!(e.submit_survey(id, &[5], ""), Err(ServeError::WrongPhase { .. })));
    assert!(matches!(e.finalize(id), Err(ServeError::WrongPhase { .. })));

    Client::new(0.1, 1).run(&e, &c, &EnvSpec::parking());
    assert!(matches!(e.action(id, &[0.0, 0.0]), Err(ServeError::WrongPhase { .. })));
    assert!(matches!(e.submit_survey(id, &[5, 8], ""), Err(ServeError::Rating(8))));
    assert!(matches!(e.submit_survey(id, &[0], ""), Err(ServeError::Rating(0))));
    e.submit_survey(id, &[5, 6, 7], "fine").unwrap();
    assert!(e.submit_survey(id, &[5], "").is_err());
    let path = e.finalize(id).unwrap();
    assert!(matches!(e.finalize(id), Err(ServeError::AlreadyFinalized(_))));
    assert!(matches!(e.action(id, &[0.0, 0.0]), Err(ServeError::AlreadyFinalized(_))));

    // The user may start a new session once the old one is closed.
    e.create_session(&req("u", "writing", "drills", 2)).unwrap();

    let session = replay_log(&read_log(&path).unwrap()).unwrap();
    assert!(session.finalized);
    assert_eq!(session.survey, Some((vec![5, 6, 7], "fine".to_string())));
    let plan = build_plan(parking_assets(), Setting::Skills, 1).unwrap().rounds().unwrap();
    assert_eq!(session.rounds.len(), plan.len());
    for (r, p) in session.rounds.iter().zip(&plan) {
        assert_eq!((r.spec.phase, &r.spec.label), (p.phase, &p.label));
        if let Some(t) = &r.trajectory {
            let v = validate_trajectory(t, &session.env).unwrap();
            assert!(v.passed(), "{}: {v}", t.id);
        }
    }
}

fn log_text(root: &std::path::Path, id: &str) -> String {
    fs::read_to_string(root.join("sessions").join(format!("{id}.jsonl"))).unwrap()
}

/// Runs `client` for `inputs` inputs (or to the survey).
fn drive(e: &teachkit_serve::Engine, id: &str, client: &mut Client, env: &EnvSpec, inputs: usize) {
    let mut msgs = e.resume(id).unwrap();
    for _ in 0..inputs {
        client.observe(&msgs);
        if client.done() {
            return;
        }
        msgs = match client.next(env) {
            teachkit_serve::ClientMsg::Action { values, .. } => e.action(id, &values).unwrap(),
            teachkit_serve::ClientMsg::PenUp { .. } => e.pen_up(id).unwrap(),
        };
    }
    client.observe(&msgs);
}

#[test]
fn restart_resumes_with_identical_behaviour() {
    for (env, setting) in [(EnvSpec::parking(), "ind_drills"), (EnvSpec::writing(), "time_heuristic")] {
        let name = env.name();
        let straight = tempfile::tempdir().unwrap();
        let e = engine(straight.path());
        let c = e.create_session(&req("r", name, setting, 9)).unwrap();
        let mut client = Client::new(0.4, 77);
        drive(&e, &c.session_id, &mut client, &env, usize::MAX);
        e.submit_survey(&c.session_id, &[4], "").unwrap();
        e.finalize(&c.session_id).unwrap();
        let want = log_text(straight.path(), &c.session_id);

        let crashed = tempfile::tempdir().unwrap();
        let mut client = Client::new(0.4, 77);
        {
            let e = engine(crashed.path());
            e.create_session(&req("r", name, setting, 9)).unwrap();
            drive(&e, &c.session_id, &mut client, &env, 150);
        }
        // Tear the last line as a crash mid-append would.
        let path = crashed.path().join("sessions").join(format!("{}.jsonl", c.session_id));
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("{\"protocol\":1,\"seq\":");
        fs::write(&path, text).unwrap();
        {
            let e = engine(crashed.path());
            assert!(matches!(
                e.create_session(&req("r", "writing", "skills", 1)),
                Err(ServeError::DuplicateSession(_))
            ));
            drive(&e, &c.session_id, &mut client, &env, 400);
        }
        let e = engine(crashed.path());
        drive(&e, &c.session_id, &mut client, &env, usize::MAX);
        e.submit_survey(&c.session_id, &[4], "").unwrap();
        e.finalize(&c.session_id).unwrap();
        assert_eq!(log_text(crashed.path(), &c.session_id), want, "{name}");

        // Finalized sessions stay closed after a restart.
        let e = engine(crashed.path());
        assert!(matches!(e.finalize(&c.session_id), Err(ServeError::AlreadyFinalized(_))));
    }
}

#[test]
fn a_diverging_log_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let e = engine(dir.path());
        let c = e.create_session(&req("x", "parking", "skills", 3)).unwrap();
        e.action(&c.session_id, &[0.5, 0.5]).unwrap();
        c.session_id
    };
    let path = dir.path().join("sessions").join(format!("{id}.jsonl"));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let step = lines.iter().position(|l| l.contains("\"event\":\"step\"")).unwrap();
    lines[step] = lines[step].replace("\"steps_left\":", "\"steps_left\":1");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let err = teachkit_serve::Engine::open(dir.path(), vec![parking_assets().clone()]).err().unwrap();
    assert!(matches!(err, ServeError::Recovery { .. }), "{err}");
}

#[test]
fn concurrent_sessions_keep_ordered_logs() {
    let dir = tempfile::tempdir().unwrap();
    let e = engine(dir.path());
    std::thread::scope(|s| {
        for k in 0..6u64 {
            let e = &e;
            s.spawn(move || {
                let (env, setting) = if k % 2 == 0 {
                    (EnvSpec::parking(), Setting::ALL[k as usize % 5])
                } else {
                    (EnvSpec::writing(), Setting::ALL[(k as usize + 1) % 5])
                };
                let c = e
                    .create_session(&req(&format!("user{k}"), env.name(), setting.as_str(), k))
                    .unwrap();
                Client::new(0.3, k).run(e, &c, &env);
                e.submit_survey(&c.session_id, &[3, 4], "").unwrap();
                e.finalize(&c.session_id).unwrap();
            });
        }
    });
    for id in e.session_ids() {
        let log = read_log(&dir.path().join("sessions").join(format!("{id}.jsonl"))).unwrap();
        let session = replay_log(&log).unwrap();
        assert!(session.finalized);
        assert_eq!(session.rounds_in(Phase::Pretest).count(), 2);
        assert_eq!(session.rounds_in(Phase::Evaluation).count(), 5);
        let order: Vec<Phase> = session.rounds.iter().map(|r| r.spec.phase).collect();
        assert!(order.windows(2).all(|w| w[0] <= w[1]), "phases out of order in {id}");
    }
}
