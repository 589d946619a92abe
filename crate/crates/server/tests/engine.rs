use std::io::Write;
use std::sync::{Arc, Mutex};

use vibrafin::locomotion::{FinActivation, FishBody, SimState};
use vibrafin_server::engine::Engine;
use vibrafin_server::protocol::{ClientMessage, ErrorCode, ScenarioRef, ServerMessage, StateMsg};
use vibrafin_server::replay::{read_log, replay};

fn state(msg: ServerMessage) -> StateMsg {
    match msg {
        ServerMessage::State(s) => s,
        other => panic!("expected state, got {other:?}"),
    }
}

fn reset(name: &str) -> ClientMessage {
    ClientMessage::Reset {
        scenario: ScenarioRef::Name(name.into()),
    }
}

fn fins(l: u8, r: u8, c: u8) -> ClientMessage {
    ClientMessage::set_fins(FinActivation::new(l == 1, r == 1, c == 1))
}

/// Scripted session: (tick at which to issue, command).
fn script() -> Vec<(u64, ClientMessage)> {
    vec![
        (0, fins(0, 0, 1)),
        (400, fins(1, 0, 1)),
        (700, ClientMessage::Pause),
        (700, ClientMessage::SetRate { snapshots_per_s: 10 }),
        (700, ClientMessage::Resume),
        (900, reset("floating_balls")),
        (900, fins(0, 0, 1)),
        (1500, fins(0, 1, 1)),
        (1500, fins(1, 1, 1)),
        (2600, fins(0, 0, 0)),
    ]
}

fn run(engine: &mut Engine, script: &[(u64, ClientMessage)], end: u64) {
    let mut pending = script.iter().peekable();
    let mut paused_calls = 0;
    while engine.tick() < end {
        while let Some((t, msg)) = pending.peek() {
            if *t > engine.tick() {
                break;
            }
            engine.command(msg.clone()).unwrap();
            pending.next();
            if engine.is_paused() {
                // Steps while paused must not advance physics or ticks.
                for _ in 0..25 {
                    assert!(!engine.step().unwrap());
                    paused_calls += 1;
                }
            }
        }
        engine.step().unwrap();
    }
    assert!(paused_calls > 0);
}

fn bits(s: &SimState) -> [u64; 13] {
    let mut out = [0; 13];
    let vals = [s.t, s.x, s.y, s.theta, s.u, s.v, s.r, s.fin_level[0], s.fin_level[1], s.fin_level[2]];
    for (o, v) in out.iter_mut().zip(vals) {
        *o = v.to_bits();
    }
    out
}

#[test]
fn identical_commands_give_identical_states() {
    let body = FishBody::default();
    let mut a = Engine::new(body.clone(), "open_water").unwrap();
    let mut b = Engine::new(body, "open_water").unwrap();
    run(&mut a, &script(), 3000);
    run(&mut b, &script(), 3000);
    assert_eq!(bits(a.state()), bits(b.state()));
    assert_eq!(a.log(), b.log());
}

#[test]
fn offline_replay_is_bit_identical() {
    let body = FishBody::default();
    let mut engine = Engine::new(body.clone(), "open_water").unwrap().record_history();
    run(&mut engine, &script(), 3000);
    let history = engine.history().unwrap();
    let traj = replay(engine.log(), &body, engine.tick()).unwrap();
    assert_eq!(traj.states.len(), history.len());
    for (live, offline) in history.iter().zip(&traj.states) {
        assert_eq!(bits(live), bits(offline), "diverged at t = {}", live.t);
    }
}

#[derive(Clone, Default)]
struct Shared(Arc<Mutex<Vec<u8>>>);

impl Write for Shared {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().write(buf)
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[test]
fn replay_file_round_trips_and_reproduces_final_state() {
    let body = FishBody::default();
    let sink = Shared::default();
    let mut engine = Engine::new(body.clone(), "open_water")
        .unwrap()
        .with_replay_sink(Box::new(sink.clone()))
        .unwrap();
    run(&mut engine, &script(), 3000);
    let bytes = sink.0.lock().unwrap().clone();
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.lines().next().unwrap().contains("\"reset\""));
    let log = read_log(text.as_bytes()).unwrap();
    assert_eq!(log, engine.log());
    let traj = replay(&log, &body, engine.tick()).unwrap();
    assert_eq!(bits(traj.states.last().unwrap()), bits(engine.state()));
}

#[test]
fn caudal_surge_speed_rises_over_fifty_snapshots() {
    let mut engine = Engine::new(FishBody::default(), "open_water").unwrap();
    engine.command(fins(0, 0, 1)).unwrap();
    let every = 1000 / engine.snapshot_rate() as u64;
    let mut last = -1.0;
    let mut last_tick = 0;
    for _ in 0..50 {
        for _ in 0..every {
            engine.step().unwrap();
        }
        let s = state(engine.snapshot());
        assert!(s.u > last, "surge speed not increasing at tick {}", s.tick);
        assert!(s.tick > last_tick);
        assert!(s.x > 0.0 && s.y.abs() < 1e-12);
        last = s.u;
        last_tick = s.tick;
    }
}

#[test]
fn collision_events_are_delivered_once() {
    let mut engine = Engine::new(FishBody::default(), "measurement_post").unwrap();
    engine.command(fins(0, 0, 1)).unwrap();
    let mut events = Vec::new();
    for _ in 0..200 {
        for _ in 0..50 {
            engine.step().unwrap();
        }
        events.extend(state(engine.snapshot()).events);
    }
    assert!(!events.is_empty(), "fish never reached the post");
    assert_eq!(events[0].obstacle, 0);
    // Resting against the post is one contact, not one per tick.
    assert!(events.len() < 5, "{} events", events.len());
    assert!(state(engine.snapshot()).events.is_empty());
}

#[test]
fn losing_the_controller_stops_fins_and_pauses() {
    let mut engine = Engine::new(FishBody::default(), "open_water").unwrap();
    engine.command(fins(1, 1, 1)).unwrap();
    for _ in 0..100 {
        engine.step().unwrap();
    }
    engine.controller_lost();
    assert!(engine.is_paused());
    assert_eq!(engine.fins(), FinActivation::OFF);
    let tick = engine.tick();
    assert!(!engine.step().unwrap());
    assert_eq!(engine.tick(), tick);
    let tail: Vec<_> = engine.log().iter().rev().take(2).map(|e| e.message.clone()).collect();
    assert_eq!(tail, vec![ClientMessage::Pause, ClientMessage::set_fins(FinActivation::OFF)]);
}

#[test]
fn bad_commands_are_rejected_and_not_logged() {
    let mut engine = Engine::new(FishBody::default(), "open_water").unwrap();
    let n = engine.log().len();
    let code = |r: Result<(), ServerMessage>| match r {
        Err(ServerMessage::Error { code, .. }) => code,
        other => panic!("expected error, got {other:?}"),
    };
    assert_eq!(code(engine.command(reset("nowhere"))), ErrorCode::UnknownScenario);
    assert_eq!(
        code(engine.command(ClientMessage::SetRate { snapshots_per_s: 0 })),
        ErrorCode::InvalidRate
    );
    assert_eq!(
        code(engine.command(ClientMessage::SetRate { snapshots_per_s: 61 })),
        ErrorCode::InvalidRate
    );
    assert_eq!(
        code(engine.command(ClientMessage::Hello { protocol_version: 1 })),
        ErrorCode::DuplicateHello
    );
    assert_eq!(engine.log().len(), n);
}

#[test]
fn reset_keeps_the_global_tick_monotone() {
    let mut engine = Engine::new(FishBody::default(), "open_water").unwrap();
    for _ in 0..10 {
        engine.step().unwrap();
    }
    engine.command(reset("floating_balls")).unwrap();
    assert_eq!(engine.tick(), 10);
    assert_eq!(engine.state().t, 0.0);
    assert_eq!(engine.scenario().name, "floating_balls");
    engine.step().unwrap();
    assert_eq!(engine.tick(), 11);
}
