use super::{ClusterConfig, Exec};
use crate::perf::PhaseProfile;
use crate::softfloat::Backend;

/// One fork-join run: executes phases on `n_cores` workers and records the
/// op counts of each worker and of the master's serial sections.
pub struct Cluster<'b> {
    cfg: ClusterConfig,
    be: &'b mut Backend,
    profile: PhaseProfile,
}

impl<'b> Cluster<'b> {
    pub fn new(cfg: ClusterConfig, be: &'b mut Backend) -> Self {
        Cluster { cfg, be, profile: PhaseProfile::default() }
    }

    pub fn n_cores(&self) -> usize {
        self.cfg.n_cores()
    }

    /// Runs `body(core_id, &mut states[core_id], backend)` on every worker
    /// and waits for all of them. Each worker gets its own backend fork, so
    /// the only shared mutable state is what `body` captures itself.
    pub fn phase<S, F>(&mut self, states: &mut [S], body: F)
    where
        S: Send,
        F: Fn(usize, &mut S, &mut Backend) + Sync,
    {
        let n = self.cfg.n_cores();
        assert_eq!(states.len(), n, "one state per worker");
        let mut forks: Vec<Backend> = (0..n).map(|_| self.be.fork()).collect();
        match self.cfg.exec() {
            Exec::Threads if n > 1 => std::thread::scope(|s| {
                let body = &body;
                for (id, (st, be)) in states.iter_mut().zip(forks.iter_mut()).enumerate() {
                    s.spawn(move || body(id, st, be));
                }
            }),
            _ => {
                for (id, (st, be)) in states.iter_mut().zip(forks.iter_mut()).enumerate() {
                    body(id, st, be);
                }
            }
        }
        let counts = forks.iter_mut().map(Backend::take_counters).collect();
        self.profile.parallel.push(counts);
    }

    /// Work done by the master alone between barriers.
    pub fn serial<R>(&mut self, f: impl FnOnce(&mut Backend) -> R) -> R {
        let mut be = self.be.fork();
        let out = f(&mut be);
        self.profile.serial += be.take_counters();
        out
    }

    /// Ends the run, adding every recorded count to the caller's backend.
    pub fn finish(self) -> PhaseProfile {
        self.be.absorb(&self.profile.total());
        self.profile
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_are_recorded_per_worker() {
        let mut be = Backend::native().counting();
        let cfg = ClusterConfig::new(3).unwrap();
        let mut cl = Cluster::new(cfg, &mut be);
        let mut out = vec![0usize; 3];
        cl.phase(&mut out, |id, slot, be| {
            be.other(id as u64 + 1);
            *slot = id * 10;
        });
        cl.serial(|be| be.other(5));
        let profile = cl.finish();
        assert_eq!(out, vec![0, 10, 20]);
        let others: Vec<u64> = profile.parallel[0].iter().map(|c| c.other_ops).collect();
        assert_eq!(others, vec![1, 2, 3]);
        assert_eq!(profile.critical_path(), 3 + 5);
        assert_eq!(be.counters().unwrap().other_ops, 11);
    }

    #[test]
    fn virtual_mode_matches_threads() {
        let run = |exec| {
            let mut be = Backend::emulated();
            let mut cl = Cluster::new(ClusterConfig::new(4).unwrap().with_exec(exec), &mut be);
            let mut acc = vec![0.0f32; 4];
            cl.phase(&mut acc, |id, a, be| {
                for i in 0..100 {
                    *a = be.add(*a, (id * 100 + i) as f32 * 0.1);
                }
            });
            acc
        };
        assert_eq!(run(Exec::Threads), run(Exec::Virtual));
    }
}
