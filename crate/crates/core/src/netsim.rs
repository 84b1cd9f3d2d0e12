//! Logical-time simulation of the distributed projection protocol.
//!
//! Row `r` is owned by node `r mod N`. The owner regenerates its row from the
//! shared seed, asks every node with a nonzero entry to sample the matching
//! instant, combines the returned readings into `sum_q Phi_rq u_q` and sends
//! that scalar to the base station. A node samples a given instant at most
//! once and shares the reading with every row that needs it, so energy is
//! charged once per `(node, instant)`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::decoder::{partition, reconstruct, PartitionSpec};
use crate::error::{Error, Result};
use crate::model::{finish_csv, EnergyLedger, EnergyProfile, ModelConstants, SamplingPlan};
use crate::planner::{east_plus_plan, PlanResult, PlannerOptions};
use crate::projection::{generate_row, scale_row_sum};
use crate::signal::{relative_error, Layout, Signal};
use crate::transform::{Basis, TransformBasis};

/// Owner of every row: `owners[r] = r mod nodes`.
pub fn assign_rows(nodes: usize, ell: usize) -> Vec<usize> {
    (0..ell).map(|r| r % nodes).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Endpoint {
    Node(usize),
    Base,
    /// Every row owner that requested the reading.
    Requesters,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Node(j) => write!(f, "node{j}"),
            Endpoint::Base => f.write_str("base"),
            Endpoint::Requesters => f.write_str("requesters"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MessageKind {
    SampleRequest,
    SampleValue,
    RowScalar,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageKind::SampleRequest => "sample-request",
            MessageKind::SampleValue => "sample-value",
            MessageKind::RowScalar => "row-scalar",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Message {
    pub sender: Endpoint,
    pub receiver: Endpoint,
    pub kind: MessageKind,
    pub row: usize,
    /// Vectorized column the message concerns; `None` for row scalars.
    pub column: Option<usize>,
    /// Payload size in bytes.
    pub payload: usize,
}

const SCALAR_BYTES: usize = 8;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MessageTrace {
    pub messages: Vec<Message>,
}

impl MessageTrace {
    pub fn count(&self, kind: MessageKind) -> usize {
        self.messages.iter().filter(|m| m.kind == kind).count()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["seq", "sender", "receiver", "kind", "row", "column", "payload"])?;
        for (i, m) in self.messages.iter().enumerate() {
            w.write_record([
                i.to_string(),
                m.sender.to_string(),
                m.receiver.to_string(),
                m.kind.to_string(),
                m.row.to_string(),
                m.column.map(|c| c.to_string()).unwrap_or_default(),
                m.payload.to_string(),
            ])?;
        }
        finish_csv(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSim {
    pub id: usize,
    pub energy: f64,
    /// Instants at which the node took a reading.
    pub sampled: BTreeSet<usize>,
    pub rows: Vec<usize>,
}

impl NodeSim {
    /// Takes the reading at `instant`; returns whether it is a new sample.
    fn sample(&mut self, instant: usize) -> bool {
        self.sampled.insert(instant)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseStation {
    pub received: Vec<Option<f64>>,
}

impl BaseStation {
    fn new(ell: usize) -> Self {
        Self {
            received: vec![None; ell],
        }
    }

    /// Unscaled `Phi u`.
    pub fn assembled(&self) -> Result<Vec<f64>> {
        self.received
            .iter()
            .enumerate()
            .map(|(r, v)| v.ok_or_else(|| Error::invalid(format!("row {r} never reached the base"))))
            .collect()
    }

    /// `x = Phi u / sqrt(ell)`.
    pub fn projections(&self) -> Result<Vec<f64>> {
        let ell = self.received.len();
        Ok(self.assembled()?.into_iter().map(|s| scale_row_sum(s, ell)).collect())
    }

    /// Decodes the assembled projections by regenerating `Phi` from the plan's seed.
    pub fn decode(
        &self,
        plan: &SamplingPlan,
        basis: &TransformBasis,
        k: usize,
        partition: &PartitionSpec,
    ) -> Result<Vec<f64>> {
        reconstruct(&self.projections()?, plan, basis, k, partition)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRun {
    pub x: Vec<f64>,
    pub nodes: Vec<NodeSim>,
    pub base: BaseStation,
    pub ledger: EnergyLedger,
    pub trace: MessageTrace,
}

/// Runs the protocol for one horizon; energy overruns are recorded, not rejected.
pub fn run(signal: &Signal, plan: &SamplingPlan, profile: &EnergyProfile, c4: f64) -> Result<SimulationRun> {
    let n = signal.nodes();
    if plan.nodes() != n || profile.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: if plan.nodes() != n { plan.nodes() } else { profile.len() },
        });
    }
    let layout = Layout::of(signal);
    let u = signal.as_vector();
    let owners = assign_rows(n, plan.ell);
    let mut nodes: Vec<NodeSim> = (0..n)
        .map(|j| NodeSim {
            id: j,
            energy: profile.energy(j),
            sampled: BTreeSet::new(),
            rows: Vec::new(),
        })
        .collect();
    for (r, &o) in owners.iter().enumerate() {
        nodes[o].rows.push(r);
    }

    let mut base = BaseStation::new(plan.ell);
    let mut trace = MessageTrace::default();
    let mut requested: HashSet<(usize, usize)> = HashSet::new();

    for (r, &owner) in owners.iter().enumerate() {
        let row = generate_row(plan.seed, r, layout, &plan.g);
        let mut acc = 0.0;
        for &(q, v) in &row.entries {
            let (j, h) = (layout.node_of(q), layout.instant_of(q));
            if j != owner && requested.insert((owner, q)) {
                trace.messages.push(Message {
                    sender: Endpoint::Node(owner),
                    receiver: Endpoint::Node(j),
                    kind: MessageKind::SampleRequest,
                    row: r,
                    column: Some(q),
                    payload: SCALAR_BYTES,
                });
            }
            if nodes[j].sample(h) {
                trace.messages.push(Message {
                    sender: Endpoint::Node(j),
                    receiver: Endpoint::Requesters,
                    kind: MessageKind::SampleValue,
                    row: r,
                    column: Some(q),
                    payload: SCALAR_BYTES,
                });
            }
            acc += v * u[q];
        }
        base.received[r] = Some(acc);
        trace.messages.push(Message {
            sender: Endpoint::Node(owner),
            receiver: Endpoint::Base,
            kind: MessageKind::RowScalar,
            row: r,
            column: None,
            payload: SCALAR_BYTES,
        });
    }

    let mut ledger = EnergyLedger::new(profile.energies().to_vec(), c4);
    for node in &nodes {
        ledger.samples[node.id] = node.sampled.len();
    }
    ledger.messages_to_base = trace.count(MessageKind::RowScalar);
    let x = base.projections()?;
    Ok(SimulationRun {
        x,
        nodes,
        base,
        ledger,
        trace,
    })
}

/// Simulates `plan`, decodes at the base and scores the reconstruction.
pub fn evaluate_plan(
    signal: &Signal,
    plan: &SamplingPlan,
    profile: &EnergyProfile,
    constants: &ModelConstants,
    basis: Basis,
) -> Result<(f64, SimulationRun)> {
    let n_hat = signal.len();
    let sim = run(signal, plan, profile, constants.c4())?;
    let transform = TransformBasis::new(basis, n_hat)?;
    let part = partition(plan.ell, constants.gamma, constants.c, n_hat)?;
    let u_hat = sim.base.decode(plan, &transform, constants.k, &part)?;
    Ok((relative_error(signal.as_vector(), &u_hat)?, sim))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndToEnd {
    pub plan: PlanResult,
    pub relative_error: f64,
    pub ledger: EnergyLedger,
}

/// Plans with [`east_plus_plan`], simulates, decodes and reports the relative error.
pub fn end_to_end(
    signal: &Signal,
    profile: &EnergyProfile,
    constants: &ModelConstants,
    basis: Basis,
    options: &PlannerOptions,
) -> Result<EndToEnd> {
    let plan = east_plus_plan(profile, constants, signal.len(), options)?;
    let (err, sim) = evaluate_plan(signal, &plan.plan, profile, constants, basis)?;
    Ok(EndToEnd {
        plan,
        relative_error: err,
        ledger: sim.ledger,
    })
}
