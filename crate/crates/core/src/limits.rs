/// Resource limits for the exhaustive engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest node count for source/destination cut enumeration.
    pub cut_nodes: usize,
    /// Largest joint transmit support enumerated by the entropy engine.
    pub support: u64,
    /// Largest number of free (non-pinned) nodes in exact unfolded-cut enumeration.
    pub unfolded_free_nodes: usize,
    /// Largest per-node received-signal table.
    pub table_entries: u64,
    /// Largest subset family handled by the tilde construction.
    pub family_size: usize,
    /// Largest number of grid points for distribution search.
    pub grid_points: u64,
    /// Largest `messages x trials` product for the coding simulator.
    pub simulation_work: u64,
}

pub const LIMIT_ENV: &str = "DETFLOW_LIMIT_NODES";

impl Default for Limits {
    fn default() -> Self {
        Limits {
            cut_nodes: 22,
            support: 1 << 24,
            unfolded_free_nodes: 18,
            table_entries: 1 << 24,
            family_size: 20,
            grid_points: 1 << 20,
            simulation_work: 1 << 32,
        }
    }
}

impl Limits {
    /// Defaults, with the node limits taken from `DETFLOW_LIMIT_NODES` when
    /// set. The unfolded free-node limit tracks the cut limit minus four.
    pub fn from_env() -> Self {
        let mut l = Limits::default();
        if let Some(n) = std::env::var(LIMIT_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            l.cut_nodes = n;
            l.unfolded_free_nodes = n.saturating_sub(4);
        }
        l
    }
}
