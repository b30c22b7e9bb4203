//! Grid-world MDPs built from ASCII maps.
//!
//! Maps use `.` for free cells, `#` for walls and exactly one `G` for the
//! goal. Every free or goal cell becomes a state, numbered in row-major
//! order. Each state has nine actions, in the order of [`MOVES`]; moves into
//! walls or off the grid leave the agent in place.
//!
//! Stochastic dynamics displace the intended landing cell by one step:
//! horizontally, vertically or diagonally, with the class mass split equally
//! among its directions. A displacement that would hit a wall or leave the
//! grid folds its mass back onto the intended landing cell.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, LayoutErrorKind, Result};
use crate::mdp::Mdp;

pub const LAYOUT_A: &str = include_str!("../layouts/layout_A.txt");
pub const LAYOUT_B: &str = include_str!("../layouts/layout_B.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Free,
    Wall,
    Goal,
}

/// Action order: stay, N, NE, E, SE, S, SW, W, NW as `(d_row, d_col)`.
pub const MOVES: [(i32, i32); 9] = [
    (0, 0),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

pub const MOVE_NAMES: [&str; 9] = ["stay", "N", "NE", "E", "SE", "S", "SW", "W", "NW"];

const HORIZONTAL: [(i32, i32); 2] = [(0, -1), (0, 1)];
const VERTICAL: [(i32, i32); 2] = [(-1, 0), (1, 0)];
const DIAGONAL: [(i32, i32); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridLayout {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    goal: (usize, usize),
    /// Row-major `(row, col)` of every non-wall cell; index = state id.
    states: Vec<(usize, usize)>,
    /// Cell index -> state id.
    state_of_cell: Vec<Option<usize>>,
}

impl GridLayout {
    /// Parses a rectangular map over `.`, `#`, `G`. Trailing blank lines
    /// and `\r` are ignored; positions in errors are 1-based.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .trim_end_matches(['\n', '\r', ' ', '\t'])
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .collect();
        let err = |line: usize, column: usize, kind| Error::Layout { line, column, kind };
        if lines.is_empty() || lines[0].is_empty() {
            return Err(err(1, 1, LayoutErrorKind::Empty));
        }
        let width = lines[0].chars().count();
        let mut cells = Vec::with_capacity(width * lines.len());
        let mut goal = None;
        for (r, line) in lines.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(err(r + 1, found.min(width) + 1, LayoutErrorKind::Ragged { expected: width, found }));
            }
            for (c, ch) in line.chars().enumerate() {
                let cell = match ch {
                    '.' => Cell::Free,
                    '#' => Cell::Wall,
                    'G' => {
                        if goal.is_some() {
                            return Err(err(r + 1, c + 1, LayoutErrorKind::MultipleGoals));
                        }
                        goal = Some((r, c));
                        Cell::Goal
                    }
                    other => return Err(err(r + 1, c + 1, LayoutErrorKind::UnknownChar(other))),
                };
                cells.push(cell);
            }
        }
        let goal = goal.ok_or_else(|| err(lines.len(), width, LayoutErrorKind::NoGoal))?;
        if !cells.contains(&Cell::Free) {
            return Err(err(goal.0 + 1, goal.1 + 1, LayoutErrorKind::NoFreeCell));
        }
        let mut states = Vec::new();
        let mut state_of_cell = vec![None; cells.len()];
        for (i, cell) in cells.iter().enumerate() {
            if *cell != Cell::Wall {
                state_of_cell[i] = Some(states.len());
                states.push((i / width, i % width));
            }
        }
        Ok(Self {
            width,
            height: lines.len(),
            cells,
            goal,
            states,
            state_of_cell,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.width + col]
    }

    pub fn goal(&self) -> (usize, usize) {
        self.goal
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_at(&self, row: usize, col: usize) -> Option<usize> {
        self.state_of_cell[row * self.width + col]
    }

    pub fn position(&self, state: usize) -> (usize, usize) {
        self.states[state]
    }

    pub fn goal_state(&self) -> usize {
        self.state_at(self.goal.0, self.goal.1).expect("goal is a state")
    }

    /// The non-wall cell at `(row, col) + delta`, or `None` if blocked.
    pub fn step(&self, (row, col): (usize, usize), (dr, dc): (i32, i32)) -> Option<(usize, usize)> {
        let r = row as i64 + dr as i64;
        let c = col as i64 + dc as i64;
        if r < 0 || c < 0 || r >= self.height as i64 || c >= self.width as i64 {
            return None;
        }
        let (r, c) = (r as usize, c as usize);
        (self.cell(r, c) != Cell::Wall).then_some((r, c))
    }

    /// Landing cell of a move: the target, or the start when blocked.
    pub fn land(&self, from: (usize, usize), delta: (i32, i32)) -> (usize, usize) {
        self.step(from, delta).unwrap_or(from)
    }

    fn open_neighbors(&self, pos: (usize, usize)) -> usize {
        MOVES[1..].iter().filter(|&&d| self.step(pos, d).is_some()).count()
    }

    /// States whose eight neighbors are all open.
    pub fn open_states(&self) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&s| self.open_neighbors(self.position(s)) == 8)
            .collect()
    }

    /// Non-goal states with at least one blocked neighbor among the eight.
    pub fn wall_adjacent_states(&self) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&s| s != self.goal_state() && self.open_neighbors(self.position(s)) < 8)
            .collect()
    }

    /// Non-goal states blocked both horizontally and vertically on at least
    /// one side each.
    pub fn corner_states(&self) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&s| {
                let p = self.position(s);
                s != self.goal_state()
                    && HORIZONTAL.iter().any(|&d| self.step(p, d).is_none())
                    && VERTICAL.iter().any(|&d| self.step(p, d).is_none())
            })
            .collect()
    }

    /// Non-goal states with exactly one open neighbor.
    pub fn dead_end_states(&self) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&s| s != self.goal_state() && self.open_neighbors(self.position(s)) == 1)
            .collect()
    }

    /// Shortest number of moves to the goal over the eight-neighbor graph;
    /// `None` when the goal is unreachable.
    pub fn distances_to_goal(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_states()];
        let goal = self.goal_state();
        dist[goal] = Some(0);
        let mut queue = VecDeque::from([goal]);
        while let Some(s) = queue.pop_front() {
            let d = dist[s].unwrap();
            for &delta in &MOVES[1..] {
                if let Some(p) = self.step(self.position(s), delta) {
                    let n = self.state_at(p.0, p.1).unwrap();
                    if dist[n].is_none() {
                        dist[n] = Some(d + 1);
                        queue.push_back(n);
                    }
                }
            }
        }
        dist
    }
}

impl FromStr for GridLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for GridLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.height {
            for c in 0..self.width {
                let ch = match self.cell(r, c) {
                    Cell::Free => '.',
                    Cell::Wall => '#',
                    Cell::Goal => 'G',
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridVariant {
    DeterministicA,
    StochasticB,
}

/// Probability of landing on the intended cell and of each displacement
/// class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub intended: f64,
    pub horizontal: f64,
    pub vertical: f64,
    pub diagonal: f64,
}

impl Perturbation {
    pub const NONE: Perturbation = Perturbation {
        intended: 1.0,
        horizontal: 0.0,
        vertical: 0.0,
        diagonal: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        let parts = [self.intended, self.horizontal, self.vertical, self.diagonal];
        if parts.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidSettings("perturbation probabilities must be >= 0".into()));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSettings(format!(
                "perturbation probabilities sum to {total}, expected 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDynamicsSpec {
    pub variant: GridVariant,
    pub goal_reward: f64,
    pub step_reward: f64,
    pub goal_terminal: bool,
    pub discount: f64,
    pub perturbation: Perturbation,
}

impl GridDynamicsSpec {
    /// Deterministic moves, +2 at the goal, no step cost, `γ = 0.95`.
    pub fn variant_a() -> Self {
        Self {
            variant: GridVariant::DeterministicA,
            goal_reward: 2.0,
            step_reward: 0.0,
            goal_terminal: false,
            discount: 0.95,
            perturbation: Perturbation::NONE,
        }
    }

    /// Noisy moves (20% intended), +1 at a terminal goal, -1 per step,
    /// `γ = 0.6`.
    pub fn variant_b() -> Self {
        Self {
            variant: GridVariant::StochasticB,
            goal_reward: 1.0,
            step_reward: -1.0,
            goal_terminal: true,
            discount: 0.6,
            perturbation: Perturbation {
                intended: 0.2,
                horizontal: 0.3,
                vertical: 0.3,
                diagonal: 0.2,
            },
        }
    }

    pub fn for_variant(variant: GridVariant) -> Self {
        match variant {
            GridVariant::DeterministicA => Self::variant_a(),
            GridVariant::StochasticB => Self::variant_b(),
        }
    }
}

/// Builds the MDP for `layout` under `spec`.
///
/// `R(s,a) = step_reward + goal_reward · P(goal | s, a)` for every non-goal
/// state. The goal is absorbing; when terminal its rewards are zero,
/// otherwise it keeps earning `step_reward + goal_reward`.
pub fn build_mdp(layout: &GridLayout, spec: &GridDynamicsSpec) -> Result<Mdp> {
    spec.perturbation.validate()?;
    let ns = layout.n_states();
    let na = MOVES.len();
    let goal = layout.goal_state();
    let mut transition = vec![0.0; ns * na * ns];
    let mut reward = vec![0.0; ns * na];
    let pert = spec.perturbation;
    let classes: [(f64, &[(i32, i32)]); 3] = [
        (pert.horizontal, &HORIZONTAL),
        (pert.vertical, &VERTICAL),
        (pert.diagonal, &DIAGONAL),
    ];

    for s in 0..ns {
        for (a, &delta) in MOVES.iter().enumerate() {
            let row = &mut transition[(s * na + a) * ns..(s * na + a + 1) * ns];
            if s == goal {
                row[s] = 1.0;
                reward[s * na + a] = if spec.goal_terminal {
                    0.0
                } else {
                    spec.step_reward + spec.goal_reward
                };
                continue;
            }
            let landing = layout.land(layout.position(s), delta);
            let index = |p: (usize, usize)| layout.state_at(p.0, p.1).unwrap();
            row[index(landing)] += pert.intended;
            for (mass, dirs) in classes {
                if mass == 0.0 {
                    continue;
                }
                let share = mass / dirs.len() as f64;
                for &d in dirs {
                    row[index(layout.land(landing, d))] += share;
                }
            }
            reward[s * na + a] = spec.step_reward + spec.goal_reward * row[goal];
        }
    }

    let mut terminal = vec![false; ns];
    terminal[goal] = spec.goal_terminal;
    Mdp::new(ns, na, transition, reward, terminal, spec.discount)
}

/// A layout together with its dynamics and the MDP built from them.
#[derive(Debug, Clone)]
pub struct GridWorld {
    pub layout: GridLayout,
    pub spec: GridDynamicsSpec,
    pub mdp: Mdp,
}

impl GridWorld {
    pub fn new(layout: GridLayout, spec: GridDynamicsSpec) -> Result<Self> {
        let mdp = build_mdp(&layout, &spec)?;
        Ok(Self { layout, spec, mdp })
    }

    /// `grid-a` (deterministic, 16×16) or `grid-b` (stochastic two rooms).
    pub fn builtin(name: &str) -> Result<Self> {
        let (text, spec) = match name.to_ascii_lowercase().as_str() {
            "grid-a" | "a" | "layout_a" => (LAYOUT_A, GridDynamicsSpec::variant_a()),
            "grid-b" | "b" | "layout_b" => (LAYOUT_B, GridDynamicsSpec::variant_b()),
            other => {
                return Err(Error::InvalidSettings(format!(
                    "unknown builtin environment `{other}` (expected grid-a or grid-b)"
                )))
            }
        };
        Self::new(GridLayout::parse(text)?, spec)
    }
}
