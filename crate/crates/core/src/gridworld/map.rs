use std::collections::BTreeMap;
use std::fmt;

use super::GridError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Empty,
    Wall,
    Hazard,
    /// Index into [`GridMap::subgoals`].
    Subgoal(usize),
}

/// Parsed map file: the grid plus its header settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    /// Row-major, `y * width + x`, with `y = 0` the first grid line.
    pub cells: Vec<Cell>,
    /// Subgoal names and cell ids, sorted by name.
    pub subgoals: Vec<(String, usize)>,
    /// Event propositions and their probabilities, in header order.
    pub events: Vec<(String, f64)>,
    /// Safety proposition costs from the `costs:` header.
    pub costs: BTreeMap<String, f64>,
    pub step_reward: f64,
    pub start: Option<(usize, usize)>,
}

pub const DEFAULT_STEP_REWARD: f64 = -1.0;
pub const DEFAULT_OBSTACLE_COST: f64 = -1000.0;

fn parse_number(key: &str, value: &str, line: usize) -> Result<f64, GridError> {
    value.trim().parse::<f64>().map_err(|_| GridError::Header {
        line,
        message: format!("bad number for {key}: {value:?}"),
    })
}

/// Parse a map file.
///
/// Header lines (`events: can=0.5`, `costs: o=-1000 step=-1`,
/// `start: x,y`) precede the grid. Legend: `.` empty, `#` wall, `o`
/// traversable hazard, any other lowercase letter a subgoal.
pub fn load_map(text: &str) -> Result<GridMap, GridError> {
    let mut events = Vec::new();
    let mut costs = BTreeMap::from([("o".to_string(), DEFAULT_OBSTACLE_COST)]);
    let mut step_reward = DEFAULT_STEP_REWARD;
    let mut start = None;
    let mut rows: Vec<(usize, &str)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        if let Some((key, rest)) = line.split_once(':') {
            if rows.is_empty() {
                match key.trim() {
                    "events" => {
                        for item in rest.split_whitespace() {
                            let (name, p) =
                                item.split_once('=').ok_or_else(|| GridError::Header {
                                    line: line_no,
                                    message: format!("expected name=probability, got {item:?}"),
                                })?;
                            let p = parse_number(name, p, line_no)?;
                            if !(0.0..=1.0).contains(&p) {
                                return Err(GridError::Header {
                                    line: line_no,
                                    message: format!("probability of {name} outside [0, 1]"),
                                });
                            }
                            events.push((name.to_string(), p));
                        }
                    }
                    "costs" => {
                        for item in rest.split_whitespace() {
                            let (name, c) =
                                item.split_once('=').ok_or_else(|| GridError::Header {
                                    line: line_no,
                                    message: format!("expected name=cost, got {item:?}"),
                                })?;
                            let c = parse_number(name, c, line_no)?;
                            if name == "step" {
                                step_reward = c;
                            } else {
                                costs.insert(name.to_string(), c);
                            }
                        }
                    }
                    "start" => {
                        let (x, y) =
                            rest.trim()
                                .split_once(',')
                                .ok_or_else(|| GridError::Header {
                                    line: line_no,
                                    message: "expected start: x,y".into(),
                                })?;
                        let x = parse_number("start", x, line_no)? as usize;
                        let y = parse_number("start", y, line_no)? as usize;
                        start = Some((x, y));
                    }
                    other => {
                        return Err(GridError::Header {
                            line: line_no,
                            message: format!("unknown header {other:?}"),
                        })
                    }
                }
                continue;
            }
        }
        rows.push((line_no, line));
    }

    if rows.is_empty() {
        return Err(GridError::Empty);
    }
    let width = rows[0].1.chars().count();
    let height = rows.len();
    let mut cells = Vec::with_capacity(width * height);
    let mut found: BTreeMap<String, usize> = BTreeMap::new();
    for (y, (line_no, row)) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(GridError::Ragged {
                line: *line_no,
                expected: width,
                found: row.chars().count(),
            });
        }
        for (x, ch) in row.chars().enumerate() {
            let cell = match ch {
                '.' => Cell::Empty,
                '#' => Cell::Wall,
                'o' => Cell::Hazard,
                'e' => return Err(GridError::Reserved { ch, line: *line_no }),
                c if c.is_ascii_lowercase() => {
                    let id = y * width + x;
                    if found.insert(c.to_string(), id).is_some() {
                        return Err(GridError::DuplicateSubgoal(c));
                    }
                    Cell::Empty
                }
                other => {
                    return Err(GridError::UnknownChar {
                        ch: other,
                        line: *line_no,
                        column: x + 1,
                    })
                }
            };
            cells.push(cell);
        }
    }
    let subgoals: Vec<(String, usize)> = found.into_iter().collect();
    for (i, (_, id)) in subgoals.iter().enumerate() {
        cells[*id] = Cell::Subgoal(i);
    }
    if let Some((name, _)) = events
        .iter()
        .find(|(n, _)| subgoals.iter().any(|(s, _)| s == n))
    {
        return Err(GridError::Header {
            line: 0,
            message: format!("event {name:?} clashes with a subgoal"),
        });
    }

    let map = GridMap {
        width,
        height,
        cells,
        subgoals,
        events,
        costs,
        step_reward,
        start,
    };
    if let Some((x, y)) = start {
        if x >= width || y >= height || map.cells[y * width + x] == Cell::Wall {
            return Err(GridError::BadStart { x, y });
        }
    }
    Ok(map)
}

impl GridMap {
    pub fn n_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn cell_id(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn coords(&self, id: usize) -> (usize, usize) {
        (id % self.width, id / self.width)
    }

    pub fn is_free(&self, id: usize) -> bool {
        self.cells[id] != Cell::Wall
    }

    /// Non-wall cells in id order.
    pub fn free_cells(&self) -> Vec<usize> {
        (0..self.n_cells()).filter(|&c| self.is_free(c)).collect()
    }

    pub fn subgoal_cell(&self, name: &str) -> Option<usize> {
        self.subgoals
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| *c)
    }

    pub fn subgoal_names(&self) -> Vec<String> {
        self.subgoals.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn start_cell(&self) -> Option<usize> {
        self.start.map(|(x, y)| self.cell_id(x, y))
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.events.is_empty() {
            let items: Vec<String> = self
                .events
                .iter()
                .map(|(n, p)| format!("{n}={p}"))
                .collect();
            writeln!(f, "events: {}", items.join(" "))?;
        }
        let mut costs: Vec<String> = self.costs.iter().map(|(n, c)| format!("{n}={c}")).collect();
        costs.push(format!("step={}", self.step_reward));
        writeln!(f, "costs: {}", costs.join(" "))?;
        if let Some((x, y)) = self.start {
            writeln!(f, "start: {x},{y}")?;
        }
        for y in 0..self.height {
            for x in 0..self.width {
                let ch = match self.cells[self.cell_id(x, y)] {
                    Cell::Empty => '.',
                    Cell::Wall => '#',
                    Cell::Hazard => 'o',
                    Cell::Subgoal(i) => self.subgoals[i].0.chars().next().unwrap_or('?'),
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
