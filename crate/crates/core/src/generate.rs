//! Seeded synthetic event logs.

use std::sync::Arc;

use ordered_float::NotNan;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::column::Column;
use crate::dataframe::Dataframe;
use crate::error::{Error, Result};

pub const CASE_COLUMN: &str = "case";
pub const ACTIVITY_COLUMN: &str = "activity";
pub const TIMESTAMP_COLUMN: &str = "timestamp";

/// 2020-01-01T00:00:00Z
const BASE_MS: i64 = 1_577_836_800_000;
const CASE_SPACING_MS: i64 = 3_600_000;
const MAX_GAP_MS: i64 = 600_000;
const RESOURCE_COUNT: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenModel {
    /// Every activity drawn independently and uniformly.
    UniformRandom,
    /// `A0 → A1 → …` (wrapping), with a uniform random jump 10% of the time.
    SequentialWithNoise,
}

impl GenModel {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "uniform_random" => Some(GenModel::UniformRandom),
            "sequential_with_noise" => Some(GenModel::SequentialWithNoise),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub num_cases: usize,
    pub num_activities: usize,
    pub mean_case_length: f64,
    pub seed: u64,
    pub model: GenModel,
    /// Additional attribute columns beyond case, activity and timestamp,
    /// cycling through a low-cardinality string resource, an integer amount
    /// (10% missing) and a float cost.
    pub extra_attributes: usize,
}

impl GenSpec {
    pub fn new(num_cases: usize, num_activities: usize, mean_case_length: f64, seed: u64) -> Self {
        GenSpec {
            num_cases,
            num_activities,
            mean_case_length,
            seed,
            model: GenModel::SequentialWithNoise,
            extra_attributes: 0,
        }
    }

    pub fn model(mut self, model: GenModel) -> Self {
        self.model = model;
        self
    }

    pub fn extra_attributes(mut self, n: usize) -> Self {
        self.extra_attributes = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.num_cases == 0 {
            return Err(Error::InvalidSpec("num_cases must be positive".into()));
        }
        if self.num_activities == 0 {
            return Err(Error::InvalidSpec("num_activities must be positive".into()));
        }
        if !(self.mean_case_length >= 1.0 && self.mean_case_length.is_finite()) {
            return Err(Error::InvalidSpec("mean_case_length must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn extra_attribute_name(j: usize) -> String {
    match j % 3 {
        0 => format!("resource_{j}"),
        1 => format!("amount_{j}"),
        _ => format!("cost_{j}"),
    }
}

/// Generates a case-contiguous log. Case lengths are `1 + Poisson(mean - 1)`,
/// timestamps strictly increase within each case, and the output is a pure
/// function of `spec`.
pub fn generate(spec: &GenSpec) -> Result<Dataframe> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let extra_len = spec.mean_case_length - 1.0;
    let poisson = (extra_len > 0.0).then(|| Poisson::new(extra_len).expect("positive rate"));

    let activities: Vec<Arc<str>> = (0..spec.num_activities)
        .map(|k| Arc::from(format!("A{k}")))
        .collect();
    let resources: Vec<Arc<str>> = (0..RESOURCE_COUNT).map(|r| Arc::from(format!("R{r}"))).collect();

    let expected = (spec.num_cases as f64 * spec.mean_case_length) as usize;
    let mut case_col = Vec::with_capacity(expected);
    let mut act_col = Vec::with_capacity(expected);
    let mut time_col = Vec::with_capacity(expected);
    let mut extras: Vec<Column> = (0..spec.extra_attributes)
        .map(|j| match j % 3 {
            0 => Column::Str(Vec::with_capacity(expected)),
            1 => Column::Int(Vec::with_capacity(expected)),
            _ => Column::Float(Vec::with_capacity(expected)),
        })
        .collect();

    let k = spec.num_activities;
    for case in 0..spec.num_cases {
        let case_id: Arc<str> = Arc::from(format!("C{case}"));
        let len = 1 + poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as usize);
        let mut t = BASE_MS + case as i64 * CASE_SPACING_MS;
        let mut current = match spec.model {
            GenModel::UniformRandom => rng.gen_range(0..k),
            GenModel::SequentialWithNoise => 0,
        };
        for step in 0..len {
            if step > 0 {
                current = match spec.model {
                    GenModel::UniformRandom => rng.gen_range(0..k),
                    GenModel::SequentialWithNoise if rng.gen_bool(0.1) => rng.gen_range(0..k),
                    GenModel::SequentialWithNoise => (current + 1) % k,
                };
                t += rng.gen_range(1..=MAX_GAP_MS);
            }
            case_col.push(Some(Arc::clone(&case_id)));
            act_col.push(Some(Arc::clone(&activities[current])));
            time_col.push(Some(t));
            for col in &mut extras {
                match col {
                    Column::Str(v) => {
                        v.push(Some(Arc::clone(&resources[rng.gen_range(0..resources.len())])))
                    }
                    Column::Int(v) => {
                        let x = rng.gen_range(0..1000i64);
                        v.push((!rng.gen_bool(0.1)).then_some(x));
                    }
                    Column::Float(v) => {
                        let cents = rng.gen_range(0..100_000i64);
                        v.push(Some(NotNan::new(cents as f64 / 100.0).expect("finite")));
                    }
                    _ => unreachable!(),
                }
            }
        }
    }

    let rows = case_col.len();
    let mut columns = vec![
        (CASE_COLUMN.to_string(), Column::Str(case_col)),
        (ACTIVITY_COLUMN.to_string(), Column::Str(act_col)),
        (TIMESTAMP_COLUMN.to_string(), Column::Timestamp(time_col)),
    ];
    columns.extend(extras.into_iter().enumerate().map(|(j, c)| (extra_attribute_name(j), c)));
    Dataframe::from_columns((0..rows as i64).collect(), columns, CASE_COLUMN, ACTIVITY_COLUMN)
}
