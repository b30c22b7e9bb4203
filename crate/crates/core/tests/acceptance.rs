//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line reaches stdout; the
//! process exits non-zero if any criterion fails.

use std::collections::VecDeque;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use empower_core::capacity::{channel_capacity, inner_solve, Channel, InnerSettings};
use empower_core::gridworld::{GridLayout, GridWorld, MOVES};
use empower_core::operator::{apply_optimal_operator, evaluate_pair};
use empower_core::random::{random_mdp, random_policy, random_simplex, random_values, rng, RandomMdpSpec};
use empower_core::{
    empowerment_values, eta, iteration_bound, solve, value_upper_bound, InverseDynamicsTable, Mdp,
    SolveResult, SolveSettings, SolverMode, TradeoffConfig, ValueVector,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn small_spec() -> RandomMdpSpec {
    RandomMdpSpec {
        max_states: 5,
        max_actions: 4,
        discount: 0.9,
        ..RandomMdpSpec::default()
    }
}

/// The 20 fixtures shared by criteria 3, 4, 5 and 10.
fn fixture_mdps() -> Vec<Mdp> {
    let mut r = rng(2024);
    (0..20).map(|_| random_mdp(&mut r, &small_spec())).collect()
}

// ---- independent oracles -------------------------------------------------

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// I(X;Y) for input distribution `px` and rows `w[x][y]`.
fn mutual_information(px: &[f64], w: &[Vec<f64>]) -> f64 {
    let ny = w[0].len();
    let py: Vec<f64> = (0..ny).map(|y| px.iter().zip(w).map(|(p, row)| p * row[y]).sum()).collect();
    let mut mi = 0.0;
    for (x, row) in w.iter().enumerate() {
        for y in 0..ny {
            let joint = px[x] * row[y];
            if joint > 0.0 {
                mi += joint * (row[y] / py[y]).ln();
            }
        }
    }
    mi
}

/// Plain Blahut-Arimoto written against the textbook update.
fn textbook_capacity(w: &[Vec<f64>]) -> f64 {
    let nx = w.len();
    let mut p = vec![1.0 / nx as f64; nx];
    for _ in 0..200_000 {
        let ny = w[0].len();
        let py: Vec<f64> = (0..ny).map(|y| p.iter().zip(w).map(|(px, row)| px * row[y]).sum()).collect();
        let d: Vec<f64> = w
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&py)
                    .filter(|(wy, _)| **wy > 0.0)
                    .map(|(wy, q)| wy * (wy / q).ln())
                    .sum()
            })
            .collect();
        let z: f64 = p.iter().zip(&d).map(|(px, dx)| px * dx.exp()).sum();
        let next: Vec<f64> = p.iter().zip(&d).map(|(px, dx)| px * dx.exp() / z).collect();
        let change = sup(&next, &p);
        p = next;
        if change < 1e-13 {
            break;
        }
    }
    mutual_information(&p, w)
}

fn channel_rows(mdp: &Mdp, s: usize) -> Vec<Vec<f64>> {
    (0..mdp.n_actions()).map(|a| mdp.transition_row(s, a).to_vec()).collect()
}

/// Max-operator value iteration on the raw tensors.
fn classical_oracle(mdp: &Mdp, alpha: f64) -> Vec<f64> {
    let (ns, na, g) = (mdp.n_states(), mdp.n_actions(), mdp.discount());
    let mut v = vec![0.0; ns];
    loop {
        let next: Vec<f64> = (0..ns)
            .map(|s| {
                (0..na)
                    .map(|a| {
                        let ev: f64 = mdp.transition_row(s, a).iter().zip(&v).map(|(p, x)| p * x).sum();
                        alpha * mdp.reward(s, a) + g * ev
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let d = sup(&next, &v);
        v = next;
        if d < 1e-13 {
            return v;
        }
    }
}

/// Bayes posterior `q(a|s',s) ∝ π(a|s)·P(s'|s,a)`; `None` where the
/// evidence is zero.
fn bayes_posterior(mdp: &Mdp, pi: &[f64], s: usize, next: usize) -> Option<Vec<f64>> {
    let na = mdp.n_actions();
    let joint: Vec<f64> = (0..na).map(|a| pi[s * na + a] * mdp.prob(s, a, next)).collect();
    let z: f64 = joint.iter().sum();
    (z > 0.0).then(|| joint.iter().map(|j| j / z).collect())
}

/// `β·ln Σ_a exp(κ_a/β)` with `κ_a = αR + E_P[β ln q + γV]`.
fn normalizer_value(mdp: &Mdp, res: &SolveResult, s: usize, alpha: f64, beta: f64) -> f64 {
    let g = mdp.discount();
    let kappa: Vec<f64> = (0..mdp.n_actions())
        .map(|a| {
            let mut k = alpha * mdp.reward(s, a);
            for next in 0..mdp.n_states() {
                let p = mdp.prob(s, a, next);
                if p > 0.0 {
                    let q = res.inverse_dynamics.get(s, next, a);
                    k += p * (beta * q.ln() + g * res.values[next]);
                }
            }
            k
        })
        .collect();
    let m = kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + beta * kappa.iter().map(|k| ((k - m) / beta).exp()).sum::<f64>().ln()
}

// ---- criteria ------------------------------------------------------------

fn c1_capacity() -> Outcome {
    let tight = InnerSettings::new(1e-10, 1_000_000).unwrap();
    let mut worst_closed: f64 = 0.0;
    let mut worst_grid: f64 = 0.0;
    for p in [0.05, 0.1, 0.25] {
        let rows = vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        let ba = channel_capacity(&Channel::from_rows(&rows).unwrap(), &tight).unwrap().capacity;
        let closed = 2f64.ln() - entropy(&[p, 1.0 - p]);
        let grid = (0..=10_000)
            .map(|i| {
                let x = i as f64 * 1e-4;
                mutual_information(&[x, 1.0 - x], &rows)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        worst_closed = worst_closed.max((ba - closed).abs());
        worst_grid = worst_grid.max((ba - grid).abs());
    }
    ensure(worst_closed <= 1e-3, || format!("closed-form gap {worst_closed:e}"))?;
    ensure(worst_grid <= 1e-3, || format!("grid-search gap {worst_grid:e}"))?;
    Ok(format!("closed-form gap {worst_closed:.1e}, grid-search gap {worst_grid:.1e}"))
}

fn c2_inner_monotone_rate() -> Outcome {
    let mut r = rng(77);
    let tight = InnerSettings::new(1e-13, 1_000_000).unwrap();
    let mut worst_drop = f64::NEG_INFINITY;
    let mut worst_rate = f64::NEG_INFINITY;
    let mut traces = 0;
    for _ in 0..50 {
        let mdp = random_mdp(&mut r, &small_spec());
        let v = random_values(&mut r, mdp.n_states(), 10.0);
        let s = r.gen_range(0..mdp.n_states());
        let beta = r.gen_range(0.2..2.0);
        let cfg = TradeoffConfig::empowered(r.gen_range(0.0..2.0), beta).unwrap();
        let run = inner_solve(&mdp, s, &v, &cfg, &InnerSettings::default()).unwrap();
        let reference = inner_solve(&mdp, s, &v, &cfg, &tight).unwrap().objective;
        let obj = &run.trace.objective_per_iteration;
        for w in obj.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        let log_a = (mdp.n_actions() as f64).ln();
        let mut best_gap = f64::INFINITY;
        for (m, o) in obj.iter().enumerate().skip(1) {
            best_gap = best_gap.min(reference - o);
            worst_rate = worst_rate.max(best_gap - beta * log_a / m as f64);
        }
        traces += 1;
    }
    ensure(worst_drop <= 1e-10, || format!("objective dropped by {worst_drop:e}"))?;
    ensure(worst_rate <= 1e-9, || format!("gap exceeded beta ln|A|/M by {worst_rate:e}"))?;
    Ok(format!(
        "{traces} traces, largest step-down {worst_drop:.1e}, largest (gap - bound) {worst_rate:.1e}"
    ))
}

fn c3_fixed_point_uniqueness() -> Outcome {
    let cfg = TradeoffConfig::empowered(1.0, 1.0).unwrap();
    let settings = SolveSettings::default();
    let tol = settings.outer_tolerance;
    let mut r = rng(99);
    let mut worst_unique: f64 = 0.0;
    let mut worst_fixed: f64 = 0.0;
    for mdp in fixture_mdps() {
        let from_zero = solve(&mdp, &cfg, &settings).unwrap();
        let init = random_values(&mut r, mdp.n_states(), value_upper_bound(&mdp, &cfg));
        let from_rand = solve(
            &mdp,
            &cfg,
            &SolveSettings {
                initial_values: Some(init),
                ..settings.clone()
            },
        )
        .unwrap();
        ensure(from_zero.report.converged && from_rand.report.converged, || "solve did not converge".into())?;
        worst_unique = worst_unique.max(from_zero.values.distance(&from_rand.values));
        let image = apply_optimal_operator(&mdp, &from_zero.values, &cfg, &settings.inner).unwrap();
        worst_fixed = worst_fixed.max(image.values.distance(&from_zero.values));
    }
    // stopping on ‖V_{t+1} - V_t‖ < tol leaves each run up to γ/(1-γ)·tol from the
    // fixed point, so runs arriving from opposite sides can differ by 2γ/(1-γ)·tol
    let reachable = 2.0 * 0.9 / 0.1 * tol;
    ensure(worst_unique <= 10.0 * tol, || {
        format!("inits disagree by {worst_unique:.2e} (limit {:.0e}; stop-rule worst case {reachable:.1e})", 10.0 * tol)
    })?;
    ensure(worst_fixed <= 2.0 * tol, || format!("‖BV*-V*‖ = {worst_fixed:e}"))?;
    Ok(format!("init discrepancy {worst_unique:.1e} (limit {:.0e}), fixed-point residual {worst_fixed:.1e} (limit {:.0e})", 10.0 * tol, 2.0 * tol))
}

fn c4_iteration_bound() -> Outcome {
    let eps = 1e-3;
    let cfg = TradeoffConfig::empowered(1.0, 1.0).unwrap();
    let tight_inner = InnerSettings::new(1e-10, 1_000_000).unwrap();
    let mut min_slack_residual = i64::MAX;
    let mut min_slack_distance = i64::MAX;
    for mdp in fixture_mdps() {
        let bound = iteration_bound(eps, mdp.discount(), eta(&mdp, &cfg)).unwrap() as i64;

        // sweeps until the recorded residual drops below ε
        let res = solve(&mdp, &cfg, &SolveSettings::with_tolerances(eps, 5e-4)).unwrap();
        ensure(res.report.converged, || "solve did not converge".into())?;
        min_slack_residual = min_slack_residual.min(bound - res.report.outer_iterations as i64);

        // sweeps until ‖V_i - V*‖ ≤ ε against a tight reference
        let reference = solve(&mdp, &cfg, &SolveSettings::with_tolerances(1e-12, 1e-10)).unwrap().values;
        let mut v = ValueVector::zeros(mdp.n_states());
        let mut sweeps = 0i64;
        while v.distance(&reference) > eps && sweeps <= bound {
            v = apply_optimal_operator(&mdp, &v, &cfg, &tight_inner).unwrap().values;
            sweeps += 1;
        }
        min_slack_distance = min_slack_distance.min(bound - sweeps);
    }
    ensure(min_slack_residual >= 0, || format!("residual count exceeded bound by {}", -min_slack_residual))?;
    ensure(min_slack_distance >= 0, || format!("distance count exceeded bound by {}", -min_slack_distance))?;
    Ok(format!(
        "min slack below bound: {min_slack_residual} sweeps (residual), {min_slack_distance} sweeps (distance to V*)"
    ))
}

fn c5_value_bound() -> Outcome {
    let settings = SolveSettings::default();
    let mut r = rng(5);
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    let mut check = |mdp: &Mdp, cfg: &TradeoffConfig| -> Result<(), String> {
        let res = solve(mdp, cfg, &settings).unwrap();
        if res.report.converged {
            worst = worst.max(res.values.sup_norm() - value_upper_bound(mdp, cfg) - settings.outer_tolerance);
            count += 1;
        }
        Ok(())
    };
    for mdp in fixture_mdps() {
        for _ in 0..3 {
            let cfg = TradeoffConfig::empowered(r.gen_range(0.0..2.0), r.gen_range(0.1..2.0)).unwrap();
            check(&mdp, &cfg)?;
        }
        check(&mdp, &TradeoffConfig::classical(1.0).unwrap())?;
    }
    for name in ["grid-a", "grid-b"] {
        let w = GridWorld::builtin(name).unwrap();
        check(&w.mdp, &TradeoffConfig::empowered(0.0, 1.0).unwrap())?;
        check(&w.mdp, &TradeoffConfig::empowered(1.0, 1.0).unwrap())?;
    }
    ensure(worst <= 0.0, || format!("bound exceeded by {worst:e}"))?;
    Ok(format!("{count} converged solves, max (‖V*‖ - bound - tol) = {worst:.3}"))
}

fn c6_limits() -> Outcome {
    let mut r = rng(6);
    let mut worst_classical: f64 = 0.0;
    let mut worst_capacity: f64 = 0.0;
    let mut worst_soft = f64::NEG_INFINITY;
    for _ in 0..20 {
        let mdp = random_mdp(&mut r, &small_spec());
        let oracle = classical_oracle(&mdp, 1.0);
        let got = solve(&mdp, &TradeoffConfig::classical(1.0).unwrap(), &SolveSettings::with_tolerances(1e-12, 1e-12))
            .unwrap()
            .values;
        worst_classical = worst_classical.max(sup(&got, &oracle));

        let zero = mdp.with_discount(0.0).unwrap();
        let got = solve(&zero, &TradeoffConfig::empowered(0.0, 1.0).unwrap(), &SolveSettings::default()).unwrap();
        ensure(got.report.outer_iterations == 1, || "gamma = 0 took more than one sweep".into())?;
        for s in 0..zero.n_states() {
            worst_capacity = worst_capacity.max((got.values[s] - textbook_capacity(&channel_rows(&zero, s))).abs());
        }

        let beta = 1e-3;
        let cfg = TradeoffConfig::new(1.0, beta, SolverMode::EntropyUniform).unwrap();
        let soft = solve(&mdp, &cfg, &SolveSettings::with_tolerances(1e-10, 1e-10)).unwrap().values;
        let limit = beta * (mdp.n_actions() as f64).ln() / (1.0 - mdp.discount()) + 1e-3;
        worst_soft = worst_soft.max(sup(&soft, &oracle) - limit);
    }
    ensure(worst_classical <= 1e-8, || format!("classical gap {worst_classical:e}"))?;
    ensure(worst_capacity <= 1e-3, || format!("capacity gap {worst_capacity:e}"))?;
    ensure(worst_soft <= 0.0, || format!("soft limit exceeded by {worst_soft:e}"))?;
    Ok(format!(
        "classical gap {worst_classical:.1e}, gamma=0 capacity gap {worst_capacity:.1e}, soft margin {:.1e}",
        -worst_soft
    ))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Smallest `V(n) - V(s)` over geodesic steps `s -> n` toward the goal,
/// excluding steps that land on the goal itself.
fn geodesic_margin(layout: &GridLayout, v: &[f64]) -> f64 {
    let dist = layout.distances_to_goal();
    let goal = layout.goal_state();
    let mut worst = f64::INFINITY;
    for s in 0..layout.n_states() {
        let Some(ds) = dist[s] else { continue };
        if s == goal {
            continue;
        }
        for &d in &MOVES[1..] {
            if let Some((r, c)) = layout.step(layout.position(s), d) {
                let n = layout.state_at(r, c).unwrap();
                if n != goal && dist[n] == Some(ds - 1) {
                    worst = worst.min(v[n] - v[s]);
                }
            }
        }
    }
    worst
}

/// Goal value minus the best neighbor value; non-negative when the goal is
/// at least as valuable as any state one step away.
fn goal_link(layout: &GridLayout, v: &[f64]) -> f64 {
    let dist = layout.distances_to_goal();
    let goal = layout.goal_state();
    (0..layout.n_states())
        .filter(|&s| dist[s] == Some(1))
        .map(|s| v[goal] - v[s])
        .fold(f64::INFINITY, f64::min)
}

fn c7_grid_a() -> Outcome {
    let w = GridWorld::builtin("grid-a").unwrap();
    let l = &w.layout;
    let settings = SolveSettings::with_tolerances(5e-4, 5e-4);
    let emp = solve(&w.mdp, &TradeoffConfig::empowered(0.0, 1.0).unwrap(), &settings).unwrap();
    ensure(emp.report.converged, || "empowerment solve did not converge".into())?;
    let v = &emp.values;
    let interior = l.open_states();
    let max_interior = interior.iter().map(|&s| v[s]).fold(f64::NEG_INFINITY, f64::max);
    let corners = l.corner_states();
    ensure(!corners.is_empty(), || "layout has no corners".into())?;
    let max_corner = corners.iter().map(|&s| v[s]).fold(f64::NEG_INFINITY, f64::max);
    ensure(max_corner < max_interior, || format!("corner {max_corner} >= interior max {max_interior}"))?;
    let open_median = median(interior.iter().map(|&s| v[s]).collect());
    let dead = l.dead_end_states();
    ensure(!dead.is_empty(), || "layout has no dead end".into())?;
    let max_dead = dead.iter().map(|&s| v[s]).fold(f64::NEG_INFINITY, f64::max);
    ensure(max_dead < open_median, || format!("dead end {max_dead} >= open median {open_median}"))?;

    let cls = solve(&w.mdp, &TradeoffConfig::classical(1.0).unwrap(), &settings).unwrap();
    let margin = geodesic_margin(l, &cls.values);
    ensure(margin > 0.0, || format!("geodesic step not strictly increasing (margin {margin:e})"))?;
    let link = goal_link(l, &cls.values);
    ensure(link >= -settings.outer_tolerance, || format!("goal below its neighbors by {}", -link))?;
    Ok(format!(
        "{} corners max {max_corner:.2} < interior max {max_interior:.2}; {} dead ends max {max_dead:.2} < open median {open_median:.2}; classical geodesic margin {margin:.3}",
        corners.len(),
        dead.len()
    ))
}

/// The cell whose removal splits the free cells into two large parts.
fn find_door(l: &GridLayout) -> Option<usize> {
    (0..l.n_states()).find(|&cut| {
        let parts = components_without(l, cut);
        parts.len() == 2 && parts.iter().all(|p| p.len() > 20)
    })
}

fn components_without(l: &GridLayout, cut: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; l.n_states()];
    seen[cut] = true;
    let mut parts = Vec::new();
    for start in 0..l.n_states() {
        if seen[start] {
            continue;
        }
        let mut part = vec![start];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            for &d in &MOVES[1..] {
                if let Some((r, c)) = l.step(l.position(s), d) {
                    let n = l.state_at(r, c).unwrap();
                    if !seen[n] {
                        seen[n] = true;
                        part.push(n);
                        queue.push_back(n);
                    }
                }
            }
        }
        parts.push(part);
    }
    parts
}

fn nearest_to_centroid(l: &GridLayout, part: &[usize]) -> usize {
    let n = part.len() as f64;
    let cr = part.iter().map(|&s| l.position(s).0 as f64).sum::<f64>() / n;
    let cc = part.iter().map(|&s| l.position(s).1 as f64).sum::<f64>() / n;
    *part
        .iter()
        .min_by(|&&a, &&b| {
            let d = |s: usize| {
                let (r, c) = l.position(s);
                (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2)
            };
            d(a).partial_cmp(&d(b)).unwrap()
        })
        .unwrap()
}

fn c8_grid_b() -> Outcome {
    let w = GridWorld::builtin("grid-b").unwrap();
    let l = &w.layout;
    let settings = SolveSettings::with_tolerances(5e-4, 5e-4);
    let emp = solve(&w.mdp, &TradeoffConfig::empowered(0.0, 1.0).unwrap(), &settings).unwrap();
    ensure(emp.report.converged, || "empowerment solve did not converge".into())?;
    let v = &emp.values;
    let door = find_door(l).ok_or("no door found")?;
    let centers: Vec<usize> = components_without(l, door).iter().map(|p| nearest_to_centroid(l, p)).collect();

    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let quartile = sorted[l.n_states() / 4 - 1];
    for &s in centers.iter().chain([&door]) {
        ensure(v[s] >= quartile, || format!("{:?} value {} below top-quartile cut {quartile}", l.position(s), v[s]))?;
    }
    let goal = l.goal_state();
    let e = empowerment_values(&w.mdp, &InnerSettings::default()).unwrap();
    ensure(e[goal] == 0.0 && v[goal] == 0.0, || format!("goal E* = {}, V* = {}", e[goal], v[goal]))?;
    let min_center = centers.iter().map(|&s| v[s]).fold(f64::INFINITY, f64::min);
    let wall_adjacent: Vec<usize> = l.wall_adjacent_states().into_iter().filter(|&s| s != door).collect();
    let max_wall = wall_adjacent.iter().map(|&s| v[s]).fold(f64::NEG_INFINITY, f64::max);
    ensure(max_wall < min_center, || format!("wall-adjacent {max_wall} >= room center {min_center}"))?;

    let cls = solve(&w.mdp, &TradeoffConfig::classical(1.0).unwrap(), &settings).unwrap();
    let margin = geodesic_margin(l, &cls.values);
    ensure(margin > 0.0, || format!("classical value not decreasing along a geodesic (margin {margin:e})"))?;
    let link = goal_link(l, &cls.values);
    ensure(link >= 0.0, || format!("goal below its neighbors by {}", -link))?;
    Ok(format!(
        "door {:?} = {:.3}, centers {:?} min {min_center:.3}, top-quartile cut {quartile:.3}, wall-adjacent max {max_wall:.3}, goal E* = 0, classical geodesic margin {margin:.1e}",
        l.position(door),
        v[door],
        centers.iter().map(|&s| l.position(s)).collect::<Vec<_>>()
    ))
}

fn c9_pair_evaluation() -> Outcome {
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mdp = random_mdp(&mut r, &small_spec());
        let (ns, na) = (mdp.n_states(), mdp.n_actions());
        let pi = random_policy(&mut r, ns, na);
        let mut q = InverseDynamicsTable::empty(ns, na);
        for s in 0..ns {
            for next in 0..ns {
                q.set_slice(s, next, &random_simplex(&mut r, na, 0.0));
            }
        }
        let (alpha, beta) = (r.gen_range(0.0..2.0), r.gen_range(0.1..2.0));
        let cfg = TradeoffConfig::empowered(alpha, beta).unwrap();
        let iterative = evaluate_pair(&mdp, &q, &pi, &cfg, 1e-12).unwrap();

        let g = mdp.discount();
        let mut m = DMatrix::<f64>::identity(ns, ns);
        let mut rhs = DVector::<f64>::zeros(ns);
        for s in 0..ns {
            for a in 0..na {
                let p_a = pi.row(s)[a];
                let mut info = 0.0;
                for next in 0..ns {
                    let p = mdp.prob(s, a, next);
                    info += p * (q.get(s, next, a) / p_a).ln();
                    m[(s, next)] -= g * p_a * p;
                }
                rhs[s] += p_a * (alpha * mdp.reward(s, a) + beta * info);
            }
        }
        let direct = m.lu().solve(&rhs).ok_or("singular system")?;
        worst = worst.max(sup(&iterative, direct.as_slice()));
    }
    ensure(worst <= 1e-8, || format!("iterative vs direct gap {worst:e}"))?;
    Ok(format!("20 triples, max gap {worst:.1e}"))
}

fn c10_consistency() -> Outcome {
    let settings = SolveSettings::default();
    let (inner_tol, outer_tol) = (settings.inner.tolerance, settings.outer_tolerance);
    let mut worst_q: f64 = 0.0;
    let mut worst_v: f64 = 0.0;
    let mut solves = 0;
    let mut r = rng(10);
    let mut cases: Vec<(Mdp, f64, f64)> = fixture_mdps()
        .into_iter()
        .map(|m| {
            let (a, b) = (r.gen_range(0.0..2.0), r.gen_range(0.2..2.0));
            (m, a, b)
        })
        .collect();
    for name in ["grid-a", "grid-b"] {
        cases.push((GridWorld::builtin(name).unwrap().mdp, 0.0, 1.0));
    }
    for (mdp, alpha, beta) in cases {
        let res = solve(&mdp, &TradeoffConfig::empowered(alpha, beta).unwrap(), &settings).unwrap();
        if !res.report.converged {
            continue;
        }
        solves += 1;
        let pi = res.policy.probs();
        for s in 0..mdp.n_states() {
            for next in 0..mdp.n_states() {
                if let Some(post) = bayes_posterior(&mdp, pi, s, next) {
                    let stored = res.inverse_dynamics.slice(s, next).ok_or("posterior slice missing")?;
                    worst_q = worst_q.max(sup(&post, stored));
                }
            }
            worst_v = worst_v.max((normalizer_value(&mdp, &res, s, alpha, beta) - res.values[s]).abs());
        }
    }
    ensure(worst_q <= 10.0 * inner_tol, || format!("posterior gap {worst_q:e}"))?;
    ensure(worst_v <= 10.0 * outer_tol, || format!("normalizer gap {worst_v:e}"))?;
    Ok(format!("{solves} converged solves, posterior gap {worst_q:.1e}, normalizer gap {worst_v:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("channel capacity exactness", c1_capacity),
        ("inner-loop monotonicity and rate", c2_inner_monotone_rate),
        ("fixed point and uniqueness", c3_fixed_point_uniqueness),
        ("iteration bound", c4_iteration_bound),
        ("value bound", c5_value_bound),
        ("limit recoveries", c6_limits),
        ("grid-world A ordering", c7_grid_a),
        ("grid-world B ordering", c8_grid_b),
        ("pair evaluation vs linear solve", c9_pair_evaluation),
        ("posterior and normalizer consistency", c10_consistency),
    ];
    let started = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
