//! Rollout storage between update phases.

/// One environment iteration as the trainers consume it: both stage
/// states, both actions with their collection-time log-probabilities, the
/// three reward components, and the episode-boundary flag.
#[derive(Debug, Clone)]
pub struct TrainRecord {
    pub s_u: Vec<f64>,
    pub a_u: usize,
    pub logp_u: f64,
    pub s_d: Vec<f64>,
    pub a_d: Vec<f64>,
    pub logp_d: f64,
    pub r_u: f64,
    pub r_d: f64,
    pub r_g: f64,
    pub done: bool,
}

impl TrainRecord {
    /// Concatenated `{s_u; s_d}` view for joint-state value branches.
    pub fn joint_state(&self) -> Vec<f64> {
        let mut joint = Vec::with_capacity(self.s_u.len() + self.s_d.len());
        joint.extend_from_slice(&self.s_u);
        joint.extend_from_slice(&self.s_d);
        joint
    }

    /// Weighted reward `w[0]*r_u + w[1]*r_d + w[2]*r_g`.
    pub fn reward_mix(&self, weights: [f64; 3]) -> f64 {
        weights[0] * self.r_u + weights[1] * self.r_d + weights[2] * self.r_g
    }
}

/// Fixed-floor trajectory buffer. A buffer is ready for training once it
/// holds at least `capacity` records AND the latest record closes an
/// episode, so stored trajectories never end mid-episode. It is emptied
/// after every training phase and refilled from scratch.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryBuffer {
    capacity: usize,
    records: Vec<TrainRecord>,
}

impl TrajectoryBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "capacity must be positive");
        Self { capacity, records: Vec::with_capacity(capacity) }
    }

    pub fn push(&mut self, record: TrainRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// True once the size floor is met and the last record is terminal.
    pub fn is_ready(&self) -> bool {
        self.records.len() >= self.capacity
            && self.records.last().map(|r| r.done).unwrap_or(false)
    }

    pub fn records(&self) -> &[TrainRecord] {
        &self.records
    }

    pub fn clear(&mut self) {
        self.records.clear();
    }
}
