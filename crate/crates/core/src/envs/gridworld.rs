//! Gridworlds and their plain-text layout format.
//!
//! A layout file is a header of `key = value` lines followed by the grid, one
//! row per line, top row first:
//!
//! ```text
//! # comments start with '#'
//! step_reward = -0.075
//! goal_reward = 1.0
//! penalty_reward = -0.5
//! max_episode_steps = 20
//!
//! SFF
//! FFF
//! FFG
//! ```
//!
//! Cell characters: `S` start (floor), `F` floor, `H` hole (absorbing, no
//! reward), `G`/`R` goal (absorbing, `goal_reward`), `W` wall, `P` penalty
//! (non-absorbing, `penalty_reward` on entry). An optional `start = row,col`
//! header places the start on a cell other than floor. Missing header keys
//! default to zero rewards and 100 steps.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{check_action, EpisodeState, Environment, Outcome, Transition, DOWN, LEFT, RIGHT, UP};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Floor,
    Hole,
    Goal,
    Wall,
    Penalty,
}

impl Cell {
    fn symbol(self) -> char {
        match self {
            Cell::Floor => 'F',
            Cell::Hole => 'H',
            Cell::Goal => 'G',
            Cell::Wall => 'W',
            Cell::Penalty => 'P',
        }
    }

    pub fn is_absorbing(self) -> bool {
        matches!(self, Cell::Hole | Cell::Goal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridworldSpec {
    pub rows: usize,
    pub cols: usize,
    /// Row-major cells.
    pub cells: Vec<Cell>,
    pub start: usize,
    pub step_reward: f64,
    pub goal_reward: f64,
    pub penalty_reward: f64,
    pub max_episode_steps: usize,
}

pub const BUILTIN_LAYOUTS: [(&str, &str); 4] = [
    ("gridworld_3x3", include_str!("../../layouts/gridworld_3x3.txt")),
    ("gridworld_3x5", include_str!("../../layouts/gridworld_3x5.txt")),
    ("frozen_lake_4x4", include_str!("../../layouts/frozen_lake_4x4.txt")),
    ("frozen_lake_8x8", include_str!("../../layouts/frozen_lake_8x8.txt")),
];

/// One of the layouts shipped with the crate.
pub fn builtin_layout(name: &str) -> Result<GridworldSpec> {
    let (_, text) = BUILTIN_LAYOUTS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown built-in layout '{name}'")))?;
    GridworldSpec::parse(text)
}

impl GridworldSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut step_reward = 0.0;
        let mut goal_reward = 0.0;
        let mut penalty_reward = 0.0;
        let mut max_episode_steps = 100;
        let mut explicit_start: Option<(usize, usize)> = None;
        let mut grid: Vec<(usize, &str)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Layout {
                line: line_no,
                message,
            };
            if let Some((key, value)) = line.split_once('=') {
                if !grid.is_empty() {
                    return Err(err("header line after the grid".into()));
                }
                let (key, value) = (key.trim(), value.trim());
                let num = || {
                    value
                        .parse::<f64>()
                        .map_err(|_| err(format!("'{value}' is not a number")))
                };
                match key {
                    "step_reward" => step_reward = num()?,
                    "goal_reward" | "goal" => goal_reward = num()?,
                    "penalty_reward" | "penalty" => penalty_reward = num()?,
                    "max_episode_steps" => {
                        max_episode_steps = value
                            .parse()
                            .map_err(|_| err(format!("'{value}' is not a step count")))?
                    }
                    "start" => {
                        let (r, c) = value
                            .split_once(',')
                            .ok_or_else(|| err("start must be 'row,col'".into()))?;
                        let parse = |s: &str| {
                            s.trim()
                                .parse::<usize>()
                                .map_err(|_| err(format!("bad start coordinate '{s}'")))
                        };
                        explicit_start = Some((parse(r)?, parse(c)?));
                    }
                    other => return Err(err(format!("unknown header key '{other}'"))),
                }
            } else {
                grid.push((line_no, line));
            }
        }

        let Some(&(_, first)) = grid.first() else {
            return Err(Error::Layout {
                line: text.lines().count(),
                message: "layout has no grid".into(),
            });
        };
        let cols = first.chars().count();
        let rows = grid.len();
        let mut cells = Vec::with_capacity(rows * cols);
        let mut marked_start = None;
        for &(line_no, row) in &grid {
            if row.chars().count() != cols {
                return Err(Error::Layout {
                    line: line_no,
                    message: format!("row has {} cells, expected {cols}", row.chars().count()),
                });
            }
            for ch in row.chars() {
                let cell = match ch.to_ascii_uppercase() {
                    'S' => {
                        if marked_start.is_some() {
                            return Err(Error::Layout {
                                line: line_no,
                                message: "more than one start cell".into(),
                            });
                        }
                        marked_start = Some(cells.len());
                        Cell::Floor
                    }
                    'F' => Cell::Floor,
                    'H' => Cell::Hole,
                    'G' | 'R' => Cell::Goal,
                    'W' => Cell::Wall,
                    'P' => Cell::Penalty,
                    other => {
                        return Err(Error::Layout {
                            line: line_no,
                            message: format!("unknown cell character '{other}'"),
                        })
                    }
                };
                cells.push(cell);
            }
        }
        let start = match (explicit_start, marked_start) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("layout sets both 'start' and an S cell".into()))
            }
            (Some((r, c)), None) => {
                if r >= rows || c >= cols {
                    return Err(Error::Config(format!("start ({r},{c}) outside the grid")));
                }
                r * cols + c
            }
            (None, Some(s)) => s,
            (None, None) => return Err(Error::Config("layout has no start cell".into())),
        };
        let spec = Self {
            rows,
            cols,
            cells,
            start,
            step_reward,
            goal_reward,
            penalty_reward,
            max_episode_steps,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.cells.len() != self.rows * self.cols {
            return Err(Error::Config("grid dimensions do not match cell count".into()));
        }
        if self.start >= self.cells.len() {
            return Err(Error::Config("start cell outside the grid".into()));
        }
        if matches!(self.cells[self.start], Cell::Wall | Cell::Hole) {
            return Err(Error::Config("start cell is a wall or hole".into()));
        }
        if !self.cells.contains(&Cell::Goal) {
            return Err(Error::Config("layout has no goal cell".into()));
        }
        if self.max_episode_steps == 0 {
            return Err(Error::Config("max_episode_steps must be positive".into()));
        }
        for r in [self.step_reward, self.goal_reward, self.penalty_reward] {
            if !r.is_finite() {
                return Err(Error::Config("rewards must be finite".into()));
            }
        }
        Ok(())
    }

    /// Serializes to the layout format; `parse(to_layout_string())` round-trips.
    pub fn to_layout_string(&self) -> String {
        let mut out = String::new();
        // `{:?}` prints the shortest representation that parses back exactly.
        writeln!(out, "step_reward = {:?}", self.step_reward).unwrap();
        writeln!(out, "goal_reward = {:?}", self.goal_reward).unwrap();
        writeln!(out, "penalty_reward = {:?}", self.penalty_reward).unwrap();
        writeln!(out, "max_episode_steps = {}", self.max_episode_steps).unwrap();
        let start_on_floor = self.cells[self.start] == Cell::Floor;
        if !start_on_floor {
            writeln!(out, "start = {},{}", self.start / self.cols, self.start % self.cols).unwrap();
        }
        out.push('\n');
        for r in 0..self.rows {
            for c in 0..self.cols {
                let idx = r * self.cols + c;
                out.push(if idx == self.start && start_on_floor {
                    'S'
                } else {
                    self.cells[idx].symbol()
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn n_states(&self) -> usize {
        self.rows * self.cols
    }

    pub fn cell(&self, state: usize) -> Cell {
        self.cells[state]
    }

    fn outcome(&self, state: usize, action: usize) -> Outcome {
        let (r, c) = (state / self.cols, state % self.cols);
        let target = match action {
            UP if r > 0 => Some(state - self.cols),
            DOWN if r + 1 < self.rows => Some(state + self.cols),
            LEFT if c > 0 => Some(state - 1),
            RIGHT if c + 1 < self.cols => Some(state + 1),
            _ => None,
        };
        let next = match target {
            Some(t) if self.cells[t] != Cell::Wall => t,
            _ => state,
        };
        let cell = self.cells[next];
        let reward = self.step_reward
            + match cell {
                Cell::Goal => self.goal_reward,
                Cell::Penalty => self.penalty_reward,
                _ => 0.0,
            };
        Outcome {
            next_state: next,
            reward,
            terminal: cell.is_absorbing(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridworldEnv {
    spec: GridworldSpec,
    episode: EpisodeState,
}

impl GridworldEnv {
    pub fn new(spec: GridworldSpec) -> Self {
        let episode = EpisodeState {
            state: spec.start,
            ..EpisodeState::default()
        };
        Self { spec, episode }
    }

    pub fn spec(&self) -> &GridworldSpec {
        &self.spec
    }
}

impl Environment for GridworldEnv {
    fn n_states(&self) -> usize {
        self.spec.n_states()
    }

    fn n_actions(&self) -> usize {
        4
    }

    fn start_state(&self) -> usize {
        self.spec.start
    }

    fn max_episode_steps(&self) -> usize {
        self.spec.max_episode_steps
    }

    fn dynamics(&self, state: usize, action: usize) -> Outcome {
        self.spec.outcome(state, action)
    }

    fn is_blocked(&self, state: usize) -> bool {
        self.spec.cells[state] == Cell::Wall
    }

    fn reset(&mut self) -> usize {
        self.episode = EpisodeState {
            state: self.spec.start,
            steps: 0,
            done: false,
        };
        self.spec.start
    }

    fn step(&mut self, action: usize) -> Result<Transition> {
        if self.episode.done {
            return Err(Error::EpisodeFinished);
        }
        check_action(action, 4)?;
        let outcome = self.spec.outcome(self.episode.state, action);
        Ok(self
            .episode
            .advance(action, outcome, self.spec.max_episode_steps))
    }
}
