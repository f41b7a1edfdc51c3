//! Deterministic discrete-event loop.
//!
//! Randomness comes from one 64-bit seed. Each station draws from its own
//! ChaCha stream (selected by station id), and churn and workload draws use
//! two reserved streams, so adding stations never perturbs existing ones.

pub mod churn;
pub mod event;
pub mod link;
pub mod log;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::hex::{HexCoord, Location, MoveClass, TopologyMap, VoId};
use crate::metrics::RunMetrics;
use crate::mobility::{advance, sample_direction, DirectionProbabilities, WalkerState};
use crate::services::{Assignment, GridServices, Job, JobId, MsId, PartialResult, SubJobId};

pub use churn::ChurnModel;
pub use event::{EventKind, EventQueue, MessageId, SimEvent};
pub use link::{Message, MessageKind, VoLink};
pub use log::{replay, EventLog, LogRecord};

const CHURN_STREAM: u64 = u64::MAX;
const WORKLOAD_STREAM: u64 = u64::MAX - 1;

/// RNG for one independent stream of a seeded run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Finish time of a sub job delivered at `delivered` to a station whose
/// processor frees up at `cpu_free_at`. Sub jobs on one station run one at a
/// time in delivery order.
pub fn execution_finish(delivered: f64, cpu_free_at: f64, work: u64, cpu_rate: f64) -> f64 {
    delivered.max(cpu_free_at) + work as f64 / cpu_rate
}

#[derive(Debug, Clone)]
struct Station {
    walker: WalkerState,
    cpu_rate: f64,
    cpu_free_at: f64,
    rng: ChaCha8Rng,
}

/// What a message does when it arrives.
#[derive(Debug, Clone, Copy)]
enum Delivery {
    Dispatch(Assignment),
    Result(SubJobId),
}

/// Everything a finished run hands back.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub log: EventLog,
    pub services: GridServices,
    pub events_processed: u64,
}

pub struct Simulation {
    cfg: ScenarioConfig,
    seed: u64,
    topo: TopologyMap,
    table: DirectionProbabilities,
    churn: ChurnModel,
    services: GridServices,
    stations: BTreeMap<MsId, Station>,
    links: Vec<VoLink>,
    coverage: Vec<HexCoord>,
    queue: EventQueue,
    in_flight: BTreeMap<MessageId, Delivery>,
    churn_rng: ChaCha8Rng,
    next_ms: u64,
    next_msg: u64,
    now: f64,
    end_time: f64,
    finished: bool,
    events_processed: u64,
    current_seq: Option<u64>,
    log: Option<EventLog>,
}

impl Simulation {
    /// Validates `cfg` and prepares the initial population and job arrivals.
    /// With `record_log` the run keeps a full event log.
    pub fn new(cfg: &ScenarioConfig, seed: u64, record_log: bool) -> Result<Self> {
        cfg.validate()?;
        let topo = cfg.topology()?;
        let table = cfg.direction_table()?;
        let churn = ChurnModel::new(cfg.mobility_factor, cfg.scan_interval_s)?;
        let links = (0..cfg.vo_count)
            .map(|_| VoLink::new(cfg.bandwidth_mbps))
            .collect::<Result<Vec<_>>>()?;
        let coverage = topo.cells().map(|(c, _)| c).collect();

        let mut sim = Self {
            cfg: cfg.clone(),
            seed,
            topo,
            table,
            churn,
            services: GridServices::new(cfg.exclude_initiator),
            stations: BTreeMap::new(),
            links,
            coverage,
            queue: EventQueue::new(),
            in_flight: BTreeMap::new(),
            churn_rng: stream_rng(seed, CHURN_STREAM),
            next_ms: 0,
            next_msg: 0,
            now: 0.0,
            end_time: cfg.duration_s,
            finished: false,
            events_processed: 0,
            current_seq: None,
            log: record_log.then(EventLog::new),
        };
        if cfg.duration_s <= 0.0 {
            sim.finished = true;
            return Ok(sim);
        }
        sim.setup();
        Ok(sim)
    }

    fn setup(&mut self) {
        let cfg = &self.cfg;
        let start_fields: [(&str, &dyn std::fmt::Display); 6] = [
            ("population", &cfg.population),
            ("mobility_factor", &cfg.mobility_factor),
            ("vo_count", &cfg.vo_count),
            ("bandwidth_mbps", &cfg.bandwidth_mbps),
            ("duration", &cfg.duration_s),
            ("exclude_initiator", &cfg.exclude_initiator),
        ];
        if let Some(log) = self.log.as_mut() {
            log.push(0.0, None, "start", &start_fields);
        }

        for _ in 0..self.cfg.population {
            let ms = self.spawn_station(false);
            self.schedule_walk(ms);
        }

        let mut workload = stream_rng(self.seed, WORKLOAD_STREAM);
        for i in 0..self.cfg.initiators {
            let job = Job {
                id: JobId(i as u64),
                initiator: MsId(i as u64),
                total_work: workload.random_range(self.cfg.job_work_min..=self.cfg.job_work_max),
                subjob_count: self.cfg.subjob_count,
                dispatch_payload_bytes: self.cfg.dispatch_payload_bytes,
                result_payload_bytes: self.cfg.result_payload_bytes,
            };
            self.queue.schedule(0.0, EventKind::JobArrival(job));
        }

        if self.churn.is_active() {
            self.queue
                .schedule(self.churn.scan_interval(), EventKind::ChurnScan);
        }
    }

    /// Creates a station at a random coverage cell. Initial stations are
    /// known to the BS; later ones register.
    fn spawn_station(&mut self, joining: bool) -> MsId {
        let ms = MsId(self.next_ms);
        self.next_ms += 1;
        let mut rng = stream_rng(self.seed, ms.0);
        let cpu_rate = rng.random_range(self.cfg.cpu_rate_min..=self.cfg.cpu_rate_max);
        let cell = self.coverage[rng.random_range(0..self.coverage.len())];
        let heading = rng.random_range(0..6u8);
        let walker = WalkerState::new(cell, heading).expect("heading in range");
        let location = self.topo.locate(cell).expect("coverage cell");

        if joining {
            self.services.register_station(ms, cpu_rate, location);
        } else {
            self.services.bootstrap_station(ms, cpu_rate, location);
        }
        self.record(
            if joining { "join" } else { "boot" },
            &[
                ("ms", &ms),
                ("cpu", &cpu_rate),
                ("q", &cell.q),
                ("r", &cell.r),
                ("ao", &location.ao),
                ("vo", &location.vo),
                ("heading", &heading),
            ],
        );
        if joining {
            self.send_control(MessageKind::Registration, location.vo);
        }
        self.stations.insert(
            ms,
            Station {
                walker,
                cpu_rate,
                cpu_free_at: self.now,
                rng,
            },
        );
        ms
    }

    fn schedule_walk(&mut self, ms: MsId) {
        if self.cfg.mobility_enabled() {
            self.queue
                .schedule(self.now + self.cfg.step_interval_s, EventKind::WalkStep(ms));
        }
    }

    fn record(&mut self, kind: &str, fields: &[(&str, &dyn std::fmt::Display)]) {
        if let Some(log) = self.log.as_mut() {
            log.push(self.now, self.current_seq, kind, fields);
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn services(&self) -> &GridServices {
        &self.services
    }

    pub fn links(&self) -> &[VoLink] {
        &self.links
    }

    pub fn topology(&self) -> &TopologyMap {
        &self.topo
    }

    pub fn events_processed(&self) -> u64 {
        self.events_processed
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Processes the next event. Returns `false` once the run is over.
    pub fn step(&mut self) -> bool {
        if self.finished {
            return false;
        }
        match self.queue.peek_time() {
            Some(t) if t < self.cfg.duration_s => {}
            _ => {
                self.finish(self.cfg.duration_s);
                return false;
            }
        }
        let ev = self.queue.pop().expect("peeked");
        debug_assert!(ev.time >= self.now);
        self.now = ev.time;
        self.current_seq = Some(ev.seq);
        self.events_processed += 1;

        match ev.kind {
            EventKind::JobArrival(job) => self.on_job_arrival(job),
            EventKind::WalkStep(ms) => self.walk_step(ms),
            EventKind::ChurnScan => self.churn_scan(),
            EventKind::SubJobFinish {
                ms,
                subjob,
                attempt,
            } => self.on_subjob_finish(ms, subjob, attempt),
            EventKind::MessageDelivered(id) => self.on_delivery(id),
        }

        if self.cfg.stop_on_completion
            && self.services.jadb().jobs().next().is_some()
            && self.services.all_jobs_finished()
        {
            self.finish(self.now);
            return false;
        }
        true
    }

    fn finish(&mut self, end: f64) {
        self.finished = true;
        self.end_time = end;
        self.current_seq = None;
        self.now = end;
        self.record("end", &[("elapsed", &end)]);
    }

    pub fn run_to_end(mut self) -> RunOutput {
        while self.step() {}
        let metrics = RunMetrics::from_simulation(&self);
        RunOutput {
            metrics,
            log: self.log.unwrap_or_default(),
            services: self.services,
            events_processed: self.events_processed,
        }
    }

    /// Length of the observation window; zero for an empty run.
    pub fn elapsed(&self) -> f64 {
        self.end_time
    }

    pub(crate) fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    fn on_job_arrival(&mut self, job: Job) {
        let fields_job = job.clone();
        match self.services.submit_job(job, self.now) {
            Ok(_) => {
                self.record(
                    "submit",
                    &[
                        ("job", &fields_job.id),
                        ("initiator", &fields_job.initiator),
                        ("work", &fields_job.total_work),
                        ("subjobs", &fields_job.subjob_count),
                        ("dispatch_bytes", &fields_job.dispatch_payload_bytes),
                        ("result_bytes", &fields_job.result_payload_bytes),
                    ],
                );
                self.assign_pending();
            }
            Err(e) => {
                let msg = e.to_string();
                self.record(
                    "stale",
                    &[
                        ("what", &"job_rejected"),
                        ("job", &fields_job.id),
                        ("reason", &msg.replace('\t', " ")),
                    ],
                );
            }
        }
    }

    /// Tries to place every pending sub job.
    fn assign_pending(&mut self) {
        for subjob in self.services.pending_subjobs() {
            let Some(ms) = self.services.select_subordinate(subjob) else {
                // nobody eligible now; retried on the next scan or step
                continue;
            };
            let assignment = self
                .services
                .dispatch(subjob, ms)
                .expect("selected station is in grid");
            self.record(
                "dispatch",
                &[
                    ("subjob", &subjob),
                    ("ms", &ms),
                    ("vo", &assignment.vo),
                    ("attempt", &assignment.attempt),
                ],
            );
            let id = self.send(
                MessageKind::Dispatch,
                assignment.vo,
                assignment.payload_bytes,
            );
            self.in_flight.insert(id, Delivery::Dispatch(assignment));
        }
    }

    /// Queues a message on a VO link and schedules its delivery.
    fn send(&mut self, kind: MessageKind, vo: VoId, size: u64) -> MessageId {
        let id = self.transmit(kind, vo, size);
        let deliver = self.links[vo.0 as usize].busy_until();
        self.queue
            .schedule(deliver, EventKind::MessageDelivered(id));
        id
    }

    /// Control traffic only costs bandwidth; nothing waits on its delivery.
    fn send_control(&mut self, kind: MessageKind, vo: VoId) {
        self.transmit(kind, vo, self.cfg.control_message_bytes);
    }

    fn transmit(&mut self, kind: MessageKind, vo: VoId, size: u64) -> MessageId {
        let id = MessageId(self.next_msg);
        self.next_msg += 1;
        let (start, deliver) = self.links[vo.0 as usize].transfer(self.now, size);
        self.record(
            "msg",
            &[
                ("id", &id.0),
                ("kind", &kind.as_str()),
                ("bytes", &size),
                ("vo", &vo),
                ("start", &start),
                ("deliver", &deliver),
            ],
        );
        id
    }

    fn on_delivery(&mut self, id: MessageId) {
        match self.in_flight.remove(&id) {
            Some(Delivery::Dispatch(a)) => self.execute_subjob(a),
            Some(Delivery::Result(subjob)) => {
                let done = self
                    .services
                    .deliver_result(subjob, self.now)
                    .expect("completed sub jobs stay completed");
                self.record("result", &[("subjob", &subjob)]);
                if let Some(job) = done {
                    let exec = self
                        .services
                        .jadb()
                        .job(job)
                        .and_then(|j| j.exec_time())
                        .expect("job just finished");
                    self.record("job_done", &[("job", &job), ("exec_time", &exec)]);
                }
            }
            None => {}
        }
    }

    /// Dispatch reached the station: start (or queue) the computation.
    fn execute_subjob(&mut self, a: Assignment) {
        if !self.services.start_execution(a.subjob, a.ms, a.attempt) {
            self.record(
                "stale",
                &[("what", &"dispatch"), ("subjob", &a.subjob), ("ms", &a.ms)],
            );
            return;
        }
        let work = self
            .services
            .jadb()
            .subjob(a.subjob)
            .expect("live sub job")
            .work;
        let station = self
            .stations
            .get_mut(&a.ms)
            .expect("executing station exists");
        let finish = execution_finish(self.now, station.cpu_free_at, work, station.cpu_rate);
        station.cpu_free_at = finish;
        self.record(
            "exec",
            &[
                ("subjob", &a.subjob),
                ("ms", &a.ms),
                ("attempt", &a.attempt),
                ("finish", &finish),
            ],
        );
        self.queue.schedule(
            finish,
            EventKind::SubJobFinish {
                ms: a.ms,
                subjob: a.subjob,
                attempt: a.attempt,
            },
        );
    }

    fn on_subjob_finish(&mut self, ms: MsId, subjob: SubJobId, attempt: u32) {
        if !self.services.is_current_execution(subjob, ms, attempt) {
            self.record(
                "stale",
                &[("what", &"finish"), ("subjob", &subjob), ("ms", &ms)],
            );
            return;
        }
        let result = PartialResult {
            subjob,
            assignee: ms,
            completed_at: self.now,
        };
        let (bytes, vo) = self
            .services
            .complete_subjob(ms, subjob, result)
            .expect("current execution");
        self.record("complete", &[("subjob", &subjob), ("ms", &ms)]);
        let id = self.send(MessageKind::Result, vo, bytes);
        self.in_flight.insert(id, Delivery::Result(subjob));
    }

    fn walk_step(&mut self, ms: MsId) {
        let in_grid = self.services.resource(ms).is_some_and(|e| e.in_grid);
        if !in_grid {
            return;
        }
        let station = self.stations.get_mut(&ms).expect("in-grid station exists");
        let k = sample_direction(&mut station.rng, &self.table);
        let from = station.walker.cell;
        let next = advance(station.walker, k);
        station.walker = next;
        let class = self
            .topo
            .classify_transition(from, next.cell)
            .expect("in-grid stations sit in coverage");
        let location = self.topo.locate(next.cell);

        match class {
            MoveClass::SameAo | MoveClass::IntraVo => {
                let loc = location.expect("covered");
                self.services
                    .on_location_update(ms, loc, class)
                    .expect("station in grid");
                self.record_move("move", ms, class, Some(loc), next.heading());
                self.send_control(MessageKind::LocationUpdate, loc.vo);
                self.schedule_walk(ms);
            }
            MoveClass::InterVo => {
                self.handover(ms, class, location, "walk");
                self.schedule_walk(ms);
            }
            MoveClass::OutOfCoverage => self.handover(ms, class, None, "walk"),
        }
    }

    fn record_move(
        &mut self,
        kind: &str,
        ms: MsId,
        class: MoveClass,
        loc: Option<Location>,
        heading: u8,
    ) {
        match loc {
            Some(l) => self.record(
                kind,
                &[
                    ("ms", &ms),
                    ("class", &class.as_str()),
                    ("q", &l.cell.q),
                    ("r", &l.cell.r),
                    ("ao", &l.ao),
                    ("vo", &l.vo),
                    ("heading", &heading),
                ],
            ),
            None => self.record(kind, &[("ms", &ms), ("class", &class.as_str())]),
        }
    }

    fn handover(&mut self, ms: MsId, class: MoveClass, loc: Option<Location>, cause: &str) {
        let aborted = self
            .services
            .on_handover(ms, class, loc)
            .expect("station in grid");
        let heading = self.stations[&ms].walker.heading();
        match loc {
            Some(l) => self.record(
                "handover",
                &[
                    ("ms", &ms),
                    ("class", &class.as_str()),
                    ("q", &l.cell.q),
                    ("r", &l.cell.r),
                    ("ao", &l.ao),
                    ("vo", &l.vo),
                    ("heading", &heading),
                    ("cause", &cause),
                ],
            ),
            None => self.record(
                "handover",
                &[("ms", &ms), ("class", &class.as_str()), ("cause", &cause)],
            ),
        }
        for subjob in &aborted {
            self.record("abort", &[("subjob", subjob), ("ms", &ms)]);
        }
        if let Some(station) = self.stations.get_mut(&ms) {
            station.cpu_free_at = self.now;
        }
        if let Some(l) = loc {
            self.send_control(MessageKind::Registration, l.vo);
        }
        if !aborted.is_empty() {
            self.assign_pending();
        }
    }

    fn churn_scan(&mut self) {
        let leaving: Vec<MsId> = self
            .services
            .resources()
            .filter(|e| e.in_grid)
            .map(|e| e.ms_id)
            .collect::<Vec<_>>()
            .into_iter()
            .filter(|_| self.churn.leaves(&mut self.churn_rng))
            .collect();
        for ms in leaving {
            self.handover(ms, MoveClass::OutOfCoverage, None, "churn");
        }
        let joins = self.churn.joins(&mut self.churn_rng, self.cfg.population);
        for _ in 0..joins {
            let ms = self.spawn_station(true);
            self.schedule_walk(ms);
        }
        self.assign_pending();

        let next = self.now + self.churn.scan_interval();
        if next < self.cfg.duration_s {
            self.queue.schedule(next, EventKind::ChurnScan);
        }
    }
}

/// Runs one seeded simulation to completion, recording the event log.
pub fn run(cfg: &ScenarioConfig, seed: u64) -> Result<RunOutput> {
    Ok(Simulation::new(cfg, seed, true)?.run_to_end())
}

/// Same as [`run`] without keeping the log.
pub fn run_quiet(cfg: &ScenarioConfig, seed: u64) -> Result<RunOutput> {
    Ok(Simulation::new(cfg, seed, false)?.run_to_end())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn execution_timing() {
        assert_eq!(execution_finish(0.0, 0.0, 50, 10.0), 5.0);
        assert_eq!(execution_finish(0.0, 0.0, 50, 20.0), 2.5);
        assert_eq!(execution_finish(3.0, 0.0, 0, 10.0), 3.0);
        // busy processor delays the start
        assert_eq!(execution_finish(1.0, 4.0, 10, 10.0), 5.0);
    }

    #[test]
    fn streams_are_independent_of_population() {
        let a: u64 = stream_rng(9, 3).random();
        let b: u64 = stream_rng(9, 3).random();
        let c: u64 = stream_rng(9, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
