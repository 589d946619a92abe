use vibrafin::locomotion::{
    builtin, read_trajectory_csv, simulate, summarize, terminal_surge_speed, write_trajectory_csv, FinActivation,
    FinRole, Scenario, ScheduleEntry, DEFAULT_STEADY_FRACTION,
};
use vibrafin::ToolkitConfig;

#[test]
fn straight_swim_settles_at_drag_balance() {
    let body = ToolkitConfig::calibrated().body;
    let sc = Scenario::constant("caudal", FinActivation::new(false, false, true), 30.0);
    let s = summarize(&simulate(&sc, &body).unwrap().states, DEFAULT_STEADY_FRACTION).unwrap();
    // Thrust along the centreline against ½ ρ C_D A u²: u = √(2F / (ρ C_D A)).
    let f = body.fin(FinRole::Caudal).thrust_magnitude;
    let hand = (2.0 * f / (body.fluid_density * body.drag_area_surge)).sqrt();
    assert!((terminal_surge_speed(f, body.fluid_density, body.drag_area_surge) - hand).abs() < 1e-12);
    assert!(((s.steady_speed - hand) / hand).abs() < 1e-3, "{} vs {hand}", s.steady_speed);
    assert!(s.turning_radius.is_infinite());
}

#[test]
fn csv_round_trip_to_printed_precision() {
    let mut sc = builtin("floating_balls").unwrap();
    sc.duration = 6.0;
    sc.decimation = 7;
    sc.schedule.push(ScheduleEntry {
        t_start: 0.0,
        t_end: 6.0,
        fins: FinActivation::new(true, false, true),
    });
    let traj = simulate(&sc, &ToolkitConfig::calibrated().body).unwrap();
    // Endpoints are kept regardless of decimation.
    assert_eq!(traj.states[0].t, 0.0);
    assert!((traj.states.last().unwrap().t - 6.0).abs() < 1e-12);
    let mut buf = Vec::new();
    write_trajectory_csv(&traj.states, &mut buf).unwrap();
    let back = read_trajectory_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), traj.states.len());
    for (a, b) in traj.states.iter().zip(&back) {
        for (p, q) in [(a.x, b.x), (a.y, b.y), (a.theta, b.theta), (a.u, b.u), (a.v, b.v), (a.r, b.r)] {
            assert!((p - q).abs() <= 5e-9 * p.abs(), "{p} vs {q}");
        }
    }
}

#[test]
fn swimming_into_the_post_raises_one_contact() {
    let mut sc = builtin("measurement_post").unwrap();
    sc.duration = 15.0;
    sc.schedule.push(ScheduleEntry {
        t_start: 0.0,
        t_end: 15.0,
        fins: FinActivation::new(false, false, true),
    });
    let body = ToolkitConfig::calibrated().body;
    let traj = simulate(&sc, &body).unwrap();
    assert!(!traj.events.is_empty());
    assert_eq!(traj.events[0].obstacle, 0);
    let post = sc.obstacles[0];
    let reach = post.radius + body.collision_radius();
    for s in &traj.states {
        assert!((s.x - post.center.0).hypot(s.y - post.center.1) >= reach * (1.0 - 1e-12));
    }
}

#[test]
fn halving_dt_moves_final_position_by_less_than_tiny_fraction_of_body_length() {
    let body = ToolkitConfig::calibrated().body;
    let run = |dt: f64| {
        let mut sc = Scenario::constant("half", FinActivation::new(true, false, true), 30.0);
        sc.dt = dt;
        *simulate(&sc, &body).unwrap().states.last().unwrap()
    };
    let (a, b) = (run(1e-3), run(0.5e-3));
    let moved = (a.x - b.x).hypot(a.y - b.y);
    assert!(moved < 1e-4 * body.body_length, "{moved}");
}

#[test]
fn zero_duration_returns_initial_state() {
    let sc = Scenario::constant("empty", FinActivation::ALL, 0.0);
    let traj = simulate(&sc, &ToolkitConfig::calibrated().body).unwrap();
    assert_eq!(traj.states.len(), 1);
    assert_eq!(traj.states[0], sc.initial);
}

#[test]
fn grazing_pass_matches_analytic_clearance() {
    // Drag-free coasting body: the path is the straight line y = 0 at constant u.
    let mut body = ToolkitConfig::calibrated().body;
    body.drag_area_surge = 0.0;
    body.drag_area_sway = 0.0;
    body.yaw_drag = 0.0;
    body.yaw_damping_speed = 0.0;
    let obstacle_r = 0.03;
    let reach = body.collision_radius() + obstacle_r;
    for (offset, expect_hit) in [(reach + 1e-4, false), (reach + 1e-6, false), (reach - 1e-4, true)] {
        let mut sc = Scenario::constant("graze", FinActivation::OFF, 4.0);
        sc.initial.u = 0.1;
        sc.obstacles = vec![vibrafin::locomotion::Obstacle::new(0.2, offset, obstacle_r)];
        let traj = simulate(&sc, &body).unwrap();
        // Dense analytic check of the same line.
        let analytic_min = (0..=40_000)
            .map(|i| {
                let x = 0.1 * 4.0 * i as f64 / 40_000.0;
                (x - 0.2).hypot(offset)
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(analytic_min < reach, expect_hit);
        assert_eq!(!traj.events.is_empty(), expect_hit, "offset {offset}");
    }
}
