//! Brokering Server, Resource Repository, JADB and BSMS.
//!
//! All state here is plain data mutated by the event loop in a fixed order.
//! The engine and the log replayer drive the same operations, which is what
//! lets a replayed log reproduce the final state exactly.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::hex::{Location, MoveClass, VoId};

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(MsId);
id_type!(JobId);
id_type!(SubJobId);

/// RR entry for one mobile station.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceEntry {
    pub ms_id: MsId,
    /// Work units per second.
    pub cpu_rate: f64,
    pub location: Location,
    pub active_subjobs: u32,
    pub in_grid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: JobId,
    pub initiator: MsId,
    pub total_work: u64,
    pub subjob_count: u32,
    pub dispatch_payload_bytes: u64,
    pub result_payload_bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubJobStatus {
    Pending,
    Assigned,
    Executing,
    Completed,
    Aborted,
}

impl SubJobStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SubJobStatus::Pending => "pending",
            SubJobStatus::Assigned => "assigned",
            SubJobStatus::Executing => "executing",
            SubJobStatus::Completed => "completed",
            SubJobStatus::Aborted => "aborted",
        }
    }

    fn is_running(self) -> bool {
        matches!(self, SubJobStatus::Assigned | SubJobStatus::Executing)
    }
}

/// Opaque partial result: who produced it and when.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialResult {
    pub subjob: SubJobId,
    pub assignee: MsId,
    pub completed_at: f64,
}

/// JADB entry. One record per logical sub job; an abort re-enters the same
/// record as `Pending` and bumps `abort_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubJobRecord {
    pub id: SubJobId,
    pub job: JobId,
    pub work: u64,
    pub status: SubJobStatus,
    pub assignee: Option<MsId>,
    pub result: Option<PartialResult>,
    pub abort_count: u32,
    result_delivered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobRecord {
    pub job: Job,
    pub submitted_at: f64,
    pub subjobs: Vec<SubJobId>,
    pub finished_at: Option<f64>,
    results_delivered: u32,
}

impl JobRecord {
    pub fn exec_time(&self) -> Option<f64> {
        self.finished_at.map(|t| t - self.submitted_at)
    }
}

/// Job Allocation Database.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Jadb {
    jobs: BTreeMap<JobId, JobRecord>,
    subjobs: BTreeMap<SubJobId, SubJobRecord>,
    next_subjob: u64,
    dispatches: u64,
    aborts: u64,
}

impl Jadb {
    pub fn jobs(&self) -> impl Iterator<Item = &JobRecord> {
        self.jobs.values()
    }

    pub fn job(&self, id: JobId) -> Option<&JobRecord> {
        self.jobs.get(&id)
    }

    pub fn subjobs(&self) -> impl Iterator<Item = &SubJobRecord> {
        self.subjobs.values()
    }

    pub fn subjob(&self, id: SubJobId) -> Option<&SubJobRecord> {
        self.subjobs.get(&id)
    }

    pub fn dispatches(&self) -> u64 {
        self.dispatches
    }

    pub fn aborts(&self) -> u64 {
        self.aborts
    }

    /// Aborted assignments over all dispatches; zero when nothing was dispatched.
    pub fn failure_rate(&self) -> f64 {
        failure_rate(self.aborts, self.dispatches)
    }
}

pub fn failure_rate(aborts: u64, dispatches: u64) -> f64 {
    if dispatches == 0 {
        0.0
    } else {
        aborts as f64 / dispatches as f64
    }
}

/// Base Station Monitoring Server registry.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BsmsRegistry {
    pub stations: BTreeMap<MsId, Location>,
    pub update_count: u64,
    pub registration_count: u64,
    pub deregistration_count: u64,
}

impl BsmsRegistry {
    /// Every write to the location database: moves, joins, re-registrations
    /// and departures.
    pub fn total_updates(&self) -> u64 {
        self.update_count + self.registration_count + self.deregistration_count
    }
}

/// A sub job handed to a station, as seen by the transport layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub subjob: SubJobId,
    pub ms: MsId,
    pub vo: VoId,
    /// Equals the record's `abort_count` at dispatch time; stale timers and
    /// deliveries are recognized by a mismatch.
    pub attempt: u32,
    pub payload_bytes: u64,
}

/// Results collected for one job so far.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectedResults {
    pub results: Vec<PartialResult>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridServices {
    rr: BTreeMap<MsId, ResourceEntry>,
    bsms: BsmsRegistry,
    jadb: Jadb,
    exclude_initiator: bool,
}

impl GridServices {
    pub fn new(exclude_initiator: bool) -> Self {
        Self {
            rr: BTreeMap::new(),
            bsms: BsmsRegistry::default(),
            jadb: Jadb::default(),
            exclude_initiator,
        }
    }

    pub fn resources(&self) -> impl Iterator<Item = &ResourceEntry> {
        self.rr.values()
    }

    pub fn resource(&self, ms: MsId) -> Option<&ResourceEntry> {
        self.rr.get(&ms)
    }

    pub fn bsms(&self) -> &BsmsRegistry {
        &self.bsms
    }

    pub fn jadb(&self) -> &Jadb {
        &self.jadb
    }

    pub fn in_grid_count(&self) -> usize {
        self.rr.values().filter(|e| e.in_grid).count()
    }

    pub fn all_jobs_finished(&self) -> bool {
        self.jadb.jobs.values().all(|j| j.finished_at.is_some())
    }

    /// Seeds a station whose initial location the BS already knows. Not
    /// counted as a registration.
    pub fn bootstrap_station(&mut self, ms: MsId, cpu_rate: f64, location: Location) {
        self.insert_station(ms, cpu_rate, location);
    }

    /// A new device joins the grid.
    pub fn register_station(&mut self, ms: MsId, cpu_rate: f64, location: Location) {
        self.insert_station(ms, cpu_rate, location);
        self.bsms.registration_count += 1;
    }

    fn insert_station(&mut self, ms: MsId, cpu_rate: f64, location: Location) {
        debug_assert!(cpu_rate > 0.0);
        self.rr.insert(
            ms,
            ResourceEntry {
                ms_id: ms,
                cpu_rate,
                location,
                active_subjobs: 0,
                in_grid: true,
            },
        );
        self.bsms.stations.insert(ms, location);
    }

    /// Decomposes a job into equal sub jobs (remainder to the last) stored as
    /// `Pending`.
    pub fn submit_job(&mut self, job: Job, now: f64) -> Result<Vec<SubJobId>> {
        match self.rr.get(&job.initiator) {
            Some(e) if e.in_grid => {}
            _ => return Err(Error::InitiatorNotInGrid(job.initiator.0)),
        }
        if job.total_work == 0 || job.subjob_count == 0 {
            return Err(Error::InvalidJob(format!(
                "total_work={} subjob_count={}",
                job.total_work, job.subjob_count
            )));
        }
        if self.jadb.jobs.contains_key(&job.id) {
            return Err(Error::InvalidJob(format!("duplicate job id {}", job.id)));
        }

        let count = job.subjob_count as u64;
        let base = job.total_work / count;
        let remainder = job.total_work % count;
        let mut ids = Vec::with_capacity(count as usize);
        for i in 0..count {
            let id = SubJobId(self.jadb.next_subjob);
            self.jadb.next_subjob += 1;
            let work = if i + 1 == count {
                base + remainder
            } else {
                base
            };
            self.jadb.subjobs.insert(
                id,
                SubJobRecord {
                    id,
                    job: job.id,
                    work,
                    status: SubJobStatus::Pending,
                    assignee: None,
                    result: None,
                    abort_count: 0,
                    result_delivered: false,
                },
            );
            ids.push(id);
        }
        self.jadb.jobs.insert(
            job.id,
            JobRecord {
                job,
                submitted_at: now,
                subjobs: ids.clone(),
                finished_at: None,
                results_delivered: 0,
            },
        );
        Ok(ids)
    }

    /// Pending sub jobs in id order.
    pub fn pending_subjobs(&self) -> Vec<SubJobId> {
        self.jadb
            .subjobs
            .values()
            .filter(|s| s.status == SubJobStatus::Pending)
            .map(|s| s.id)
            .collect()
    }

    /// Least-loaded eligible station, ties broken by higher cpu rate and then
    /// lower id.
    pub fn select_subordinate(&self, subjob: SubJobId) -> Option<MsId> {
        let rec = self.jadb.subjobs.get(&subjob)?;
        let initiator = self.jadb.jobs.get(&rec.job)?.job.initiator;
        self.rr
            .values()
            .filter(|e| e.in_grid && !(self.exclude_initiator && e.ms_id == initiator))
            .min_by(|a, b| {
                a.active_subjobs
                    .cmp(&b.active_subjobs)
                    .then(b.cpu_rate.total_cmp(&a.cpu_rate))
                    .then(a.ms_id.cmp(&b.ms_id))
            })
            .map(|e| e.ms_id)
    }

    pub fn dispatch(&mut self, subjob: SubJobId, ms: MsId) -> Result<Assignment> {
        let rec = self
            .jadb
            .subjobs
            .get(&subjob)
            .ok_or(Error::UnknownSubJob(subjob.0))?;
        if rec.status != SubJobStatus::Pending {
            return Err(wrong_status(rec, "pending"));
        }
        let entry = self.rr.get_mut(&ms).ok_or(Error::UnknownStation(ms.0))?;
        if !entry.in_grid {
            return Err(Error::DispatchAborted {
                subjob: subjob.0,
                ms: ms.0,
            });
        }
        entry.active_subjobs += 1;
        let vo = entry.location.vo;

        let rec = self.jadb.subjobs.get_mut(&subjob).expect("checked above");
        rec.status = SubJobStatus::Assigned;
        rec.assignee = Some(ms);
        let attempt = rec.abort_count;
        let payload_bytes = self.jadb.jobs[&rec.job].job.dispatch_payload_bytes;
        self.jadb.dispatches += 1;
        Ok(Assignment {
            subjob,
            ms,
            vo,
            attempt,
            payload_bytes,
        })
    }

    /// The dispatch message reached the station. Returns `false` when the
    /// assignment it belonged to has since been aborted.
    pub fn start_execution(&mut self, subjob: SubJobId, ms: MsId, attempt: u32) -> bool {
        match self.jadb.subjobs.get_mut(&subjob) {
            Some(rec)
                if rec.status == SubJobStatus::Assigned
                    && rec.assignee == Some(ms)
                    && rec.abort_count == attempt =>
            {
                rec.status = SubJobStatus::Executing;
                true
            }
            _ => false,
        }
    }

    /// Whether `(subjob, ms, attempt)` still names the live execution.
    pub fn is_current_execution(&self, subjob: SubJobId, ms: MsId, attempt: u32) -> bool {
        self.jadb.subjobs.get(&subjob).is_some_and(|rec| {
            rec.status == SubJobStatus::Executing
                && rec.assignee == Some(ms)
                && rec.abort_count == attempt
        })
    }

    /// Stores a partial result. Returns the result payload size and the VO
    /// link it travels on.
    pub fn complete_subjob(
        &mut self,
        ms: MsId,
        subjob: SubJobId,
        result: PartialResult,
    ) -> Result<(u64, VoId)> {
        let rec = self
            .jadb
            .subjobs
            .get(&subjob)
            .ok_or(Error::UnknownSubJob(subjob.0))?;
        if rec.assignee != Some(ms) {
            return Err(Error::AssigneeMismatch {
                subjob: subjob.0,
                ms: ms.0,
                assignee: rec.assignee.map(|m| m.0),
            });
        }
        if rec.status != SubJobStatus::Executing {
            return Err(wrong_status(rec, "executing"));
        }
        let entry = self.rr.get_mut(&ms).ok_or(Error::UnknownStation(ms.0))?;
        entry.active_subjobs -= 1;
        let vo = entry.location.vo;

        let rec = self.jadb.subjobs.get_mut(&subjob).expect("checked above");
        rec.status = SubJobStatus::Completed;
        rec.result = Some(result);
        let bytes = self.jadb.jobs[&rec.job].job.result_payload_bytes;
        Ok((bytes, vo))
    }

    /// A result message reached the BS. Returns the job id when this was the
    /// last outstanding result of its job.
    pub fn deliver_result(&mut self, subjob: SubJobId, now: f64) -> Result<Option<JobId>> {
        let rec = self
            .jadb
            .subjobs
            .get_mut(&subjob)
            .ok_or(Error::UnknownSubJob(subjob.0))?;
        if rec.status != SubJobStatus::Completed {
            return Err(wrong_status(rec, "completed"));
        }
        if rec.result_delivered {
            return Ok(None);
        }
        rec.result_delivered = true;
        let job = self
            .jadb
            .jobs
            .get_mut(&rec.job)
            .expect("sub job without job");
        job.results_delivered += 1;
        if job.results_delivered == job.job.subjob_count {
            job.finished_at = Some(now);
            Ok(Some(job.job.id))
        } else {
            Ok(None)
        }
    }

    /// Movement that keeps the station inside its VO.
    pub fn on_location_update(
        &mut self,
        ms: MsId,
        location: Location,
        class: MoveClass,
    ) -> Result<()> {
        if class.is_handover() {
            return Err(Error::WrongMoveClass(class.as_str()));
        }
        let entry = self.rr.get_mut(&ms).ok_or(Error::UnknownStation(ms.0))?;
        if !entry.in_grid {
            return Err(Error::UnknownStation(ms.0));
        }
        entry.location = location;
        self.bsms.stations.insert(ms, location);
        self.bsms.update_count += 1;
        Ok(())
    }

    /// VO change or departure: aborts every running sub job on the station
    /// and returns them to `Pending`.
    pub fn on_handover(
        &mut self,
        ms: MsId,
        class: MoveClass,
        new_location: Option<Location>,
    ) -> Result<Vec<SubJobId>> {
        if !class.is_handover() {
            return Err(Error::WrongMoveClass(class.as_str()));
        }
        let entry = self.rr.get_mut(&ms).ok_or(Error::UnknownStation(ms.0))?;
        if !entry.in_grid {
            return Err(Error::UnknownStation(ms.0));
        }

        let mut aborted = Vec::new();
        for rec in self.jadb.subjobs.values_mut() {
            if rec.status.is_running() && rec.assignee == Some(ms) {
                rec.status = SubJobStatus::Aborted;
                rec.abort_count += 1;
                self.jadb.aborts += 1;
                // re-entered for reassignment
                rec.status = SubJobStatus::Pending;
                rec.assignee = None;
                aborted.push(rec.id);
            }
        }
        entry.active_subjobs = 0;

        match class {
            MoveClass::InterVo => {
                let loc = new_location.ok_or_else(|| {
                    Error::InvalidTopology("inter-VO handover without a destination".into())
                })?;
                entry.location = loc;
                self.bsms.stations.insert(ms, loc);
                self.bsms.registration_count += 1;
            }
            _ => {
                entry.in_grid = false;
                self.bsms.stations.remove(&ms);
                self.bsms.deregistration_count += 1;
            }
        }
        Ok(aborted)
    }

    pub fn collect_results(&self, job: JobId) -> Result<CollectedResults> {
        let rec = self.jadb.jobs.get(&job).ok_or(Error::UnknownJob(job.0))?;
        let results: Vec<_> = rec
            .subjobs
            .iter()
            .filter_map(|id| self.jadb.subjobs[id].result)
            .collect();
        let complete = results.len() == rec.subjobs.len();
        Ok(CollectedResults { results, complete })
    }

    pub fn failure_rate(&self) -> f64 {
        self.jadb.failure_rate()
    }

    /// Cross-checks RR, JADB and BSMS. Returns a description of the first
    /// violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        for job in self.jadb.jobs.values() {
            let live = job
                .subjobs
                .iter()
                .filter(|id| self.jadb.subjobs[id].status != SubJobStatus::Aborted)
                .count();
            if live != job.job.subjob_count as usize {
                return Err(format!(
                    "job {}: {live} live sub jobs, expected {}",
                    job.job.id, job.job.subjob_count
                ));
            }
        }
        let mut load: BTreeMap<MsId, u32> = BTreeMap::new();
        for rec in self.jadb.subjobs.values() {
            match rec.status {
                SubJobStatus::Completed if rec.result.is_none() => {
                    return Err(format!("sub job {} completed without result", rec.id));
                }
                s if s.is_running() => match rec.assignee {
                    Some(ms) => *load.entry(ms).or_default() += 1,
                    None => return Err(format!("sub job {} running without assignee", rec.id)),
                },
                _ => {}
            }
        }
        for e in self.rr.values() {
            let expected = load.get(&e.ms_id).copied().unwrap_or(0);
            if e.active_subjobs != expected {
                return Err(format!(
                    "station {}: RR load {} but JADB has {expected}",
                    e.ms_id, e.active_subjobs
                ));
            }
            match (e.in_grid, self.bsms.stations.get(&e.ms_id)) {
                (true, Some(loc)) if *loc == e.location => {}
                (false, None) => {}
                _ => return Err(format!("station {}: RR and BSMS disagree", e.ms_id)),
            }
        }
        if self.bsms.stations.len() != self.in_grid_count() {
            return Err("BSMS tracks stations missing from RR".into());
        }
        if self.jadb.aborts > self.jadb.dispatches {
            return Err("more aborts than dispatches".into());
        }
        Ok(())
    }
}

fn wrong_status(rec: &SubJobRecord, expected: &'static str) -> Error {
    Error::WrongStatus {
        subjob: rec.id.0,
        status: rec.status.as_str(),
        expected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hex::{AoId, HexCoord};

    fn loc(q: i32, vo: u32) -> Location {
        Location {
            cell: HexCoord::new(q, 0),
            ao: AoId(vo),
            vo: VoId(vo),
        }
    }

    fn job(id: u64, initiator: u64, work: u64, count: u32) -> Job {
        Job {
            id: JobId(id),
            initiator: MsId(initiator),
            total_work: work,
            subjob_count: count,
            dispatch_payload_bytes: 100,
            result_payload_bytes: 50,
        }
    }

    fn works(g: &GridServices, ids: &[SubJobId]) -> Vec<u64> {
        ids.iter()
            .map(|id| g.jadb().subjob(*id).unwrap().work)
            .collect()
    }

    fn grid_with(cpus: &[f64]) -> GridServices {
        let mut g = GridServices::new(true);
        for (i, cpu) in cpus.iter().enumerate() {
            g.bootstrap_station(MsId(i as u64), *cpu, loc(i as i32, 0));
        }
        g
    }

    #[test]
    fn decomposition() {
        let mut g = grid_with(&[1.0]);
        let ids = g.submit_job(job(0, 0, 100, 4), 0.0).unwrap();
        assert_eq!(works(&g, &ids), vec![25, 25, 25, 25]);
        let ids = g.submit_job(job(1, 0, 10, 3), 0.0).unwrap();
        assert_eq!(works(&g, &ids), vec![3, 3, 4]);
        let ids = g.submit_job(job(2, 0, 77, 1), 0.0).unwrap();
        assert_eq!(works(&g, &ids), vec![77]);
        assert!(g
            .jadb()
            .subjobs()
            .all(|s| s.status == SubJobStatus::Pending));
    }

    #[test]
    fn submit_requires_registered_initiator() {
        let mut g = grid_with(&[1.0]);
        assert_eq!(
            g.submit_job(job(0, 9, 10, 1), 0.0),
            Err(Error::InitiatorNotInGrid(9))
        );
    }

    #[test]
    fn selection_prefers_faster_on_equal_load() {
        let mut g = grid_with(&[1.0, 1.0, 2.0]);
        let ids = g.submit_job(job(0, 0, 10, 1), 0.0).unwrap();
        assert_eq!(g.select_subordinate(ids[0]), Some(MsId(2)));
    }

    #[test]
    fn selection_excludes_initiator() {
        let mut g = grid_with(&[5.0]);
        let ids = g.submit_job(job(0, 0, 10, 1), 0.0).unwrap();
        assert_eq!(g.select_subordinate(ids[0]), None);

        let mut open = GridServices::new(false);
        open.bootstrap_station(MsId(0), 5.0, loc(0, 0));
        let ids = open.submit_job(job(0, 0, 10, 1), 0.0).unwrap();
        assert_eq!(open.select_subordinate(ids[0]), Some(MsId(0)));
    }

    #[test]
    fn selection_prefers_least_loaded() {
        let mut g = grid_with(&[1.0, 3.0, 3.0]);
        let ids = g.submit_job(job(0, 0, 40, 4), 0.0).unwrap();
        // load station 1 with three sub jobs
        for id in &ids[..3] {
            g.dispatch(*id, MsId(1)).unwrap();
        }
        assert_eq!(g.select_subordinate(ids[3]), Some(MsId(2)));
        assert_eq!(g.resource(MsId(1)).unwrap().active_subjobs, 3);
    }

    #[test]
    fn dispatch_to_departed_station_keeps_pending() {
        let mut g = grid_with(&[1.0, 1.0]);
        let ids = g.submit_job(job(0, 0, 10, 1), 0.0).unwrap();
        g.on_handover(MsId(1), MoveClass::OutOfCoverage, None)
            .unwrap();
        let err = g.dispatch(ids[0], MsId(1)).unwrap_err();
        assert!(matches!(err, Error::DispatchAborted { .. }));
        assert_eq!(
            g.jadb().subjob(ids[0]).unwrap().status,
            SubJobStatus::Pending
        );
        assert_eq!(g.jadb().dispatches(), 0);
    }

    #[test]
    fn full_lifecycle() {
        let mut g = grid_with(&[1.0, 2.0]);
        let ids = g.submit_job(job(0, 0, 10, 2), 1.0).unwrap();
        for id in &ids {
            let ms = g.select_subordinate(*id).unwrap();
            let a = g.dispatch(*id, ms).unwrap();
            assert!(g.start_execution(*id, ms, a.attempt));
        }
        g.check_invariants().unwrap();
        for (i, id) in ids.iter().enumerate() {
            let result = PartialResult {
                subjob: *id,
                assignee: MsId(1),
                completed_at: 3.0,
            };
            g.complete_subjob(MsId(1), *id, result).unwrap();
            let done = g.deliver_result(*id, 4.0 + i as f64).unwrap();
            assert_eq!(done.is_some(), i == 1);
        }
        let collected = g.collect_results(JobId(0)).unwrap();
        assert!(collected.complete);
        assert_eq!(collected.results.len(), 2);
        assert_eq!(g.jadb().job(JobId(0)).unwrap().exec_time(), Some(4.0));
        g.check_invariants().unwrap();
        assert!(g.collect_results(JobId(7)).is_err());
    }

    #[test]
    fn mismatched_assignee_is_a_hard_error() {
        let mut g = grid_with(&[1.0, 1.0, 1.0]);
        let ids = g.submit_job(job(0, 0, 10, 1), 0.0).unwrap();
        let a = g.dispatch(ids[0], MsId(1)).unwrap();
        g.start_execution(ids[0], MsId(1), a.attempt);
        let result = PartialResult {
            subjob: ids[0],
            assignee: MsId(2),
            completed_at: 1.0,
        };
        assert!(matches!(
            g.complete_subjob(MsId(2), ids[0], result),
            Err(Error::AssigneeMismatch { .. })
        ));
    }

    #[test]
    fn handover_aborts_running_subjobs() {
        let mut g = grid_with(&[1.0, 1.0, 1.0]);
        let ids = g.submit_job(job(0, 0, 10, 2), 0.0).unwrap();
        for id in &ids {
            let a = g.dispatch(*id, MsId(1)).unwrap();
            g.start_execution(*id, MsId(1), a.attempt);
        }
        let aborted = g
            .on_handover(MsId(1), MoveClass::InterVo, Some(loc(7, 1)))
            .unwrap();
        assert_eq!(aborted, ids);
        assert_eq!(g.bsms().registration_count, 1);
        assert_eq!(g.resource(MsId(1)).unwrap().location.vo, VoId(1));
        g.check_invariants().unwrap();
        for id in &ids {
            let ms = g.select_subordinate(*id).unwrap();
            g.dispatch(*id, ms).unwrap();
        }
        assert_eq!(g.jadb().dispatches(), 4);
        assert!((g.failure_rate() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn abort_count_accumulates() {
        let mut g = grid_with(&[1.0, 1.0]);
        let ids = g.submit_job(job(0, 0, 10, 1), 0.0).unwrap();
        for round in 1..=3 {
            g.dispatch(ids[0], MsId(1)).unwrap();
            g.on_handover(
                MsId(1),
                MoveClass::InterVo,
                Some(loc(round, round as u32 % 2)),
            )
            .unwrap();
            assert_eq!(g.jadb().subjob(ids[0]).unwrap().abort_count, round as u32);
        }
        // stale attempt no longer starts
        assert!(!g.start_execution(ids[0], MsId(1), 0));
    }

    #[test]
    fn idle_departure() {
        let mut g = grid_with(&[1.0, 1.0]);
        let aborted = g
            .on_handover(MsId(1), MoveClass::OutOfCoverage, None)
            .unwrap();
        assert!(aborted.is_empty());
        assert_eq!(g.bsms().deregistration_count, 1);
        assert!(!g.resource(MsId(1)).unwrap().in_grid);
        assert!(g
            .on_handover(MsId(1), MoveClass::OutOfCoverage, None)
            .is_err());
        g.check_invariants().unwrap();
    }

    #[test]
    fn location_update_rules() {
        let mut g = grid_with(&[1.0]);
        g.on_location_update(MsId(0), loc(1, 0), MoveClass::IntraVo)
            .unwrap();
        g.on_location_update(MsId(0), loc(2, 0), MoveClass::SameAo)
            .unwrap();
        assert_eq!(g.bsms().update_count, 2);
        assert!(g
            .on_location_update(MsId(0), loc(3, 1), MoveClass::InterVo)
            .is_err());
        assert!(g
            .on_location_update(MsId(5), loc(3, 0), MoveClass::SameAo)
            .is_err());
        assert!(g.on_handover(MsId(0), MoveClass::SameAo, None).is_err());
    }

    #[test]
    fn failure_rate_definition() {
        assert_eq!(failure_rate(0, 40), 0.0);
        assert_eq!(failure_rate(10, 50), 0.2);
        assert_eq!(failure_rate(0, 0), 0.0);
    }
}
