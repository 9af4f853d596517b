//! JSON instance files: one array of `{kind, payload, tape}` records.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ClusteringInstance, GraphInstance, Instance, IqpInstance, KnapsackInstance, RandomTape, TapedInstance};
use crate::error::{Error, Location, Result};

#[derive(Serialize, Deserialize)]
struct Record {
    kind: String,
    payload: Value,
    tape: RandomTape,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KnapsackPayload {
    values: Vec<f64>,
    sizes: Vec<f64>,
    capacity: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphPayload {
    n: usize,
    weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
    edge_weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusteringPayload {
    n: usize,
    dist: Vec<Vec<f64>>,
    k: usize,
    ground_truth: Option<Vec<Vec<usize>>>,
    max_dist: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IqpPayload {
    n: usize,
    a: Vec<Vec<f64>>,
}

fn payload_of(instance: &Instance) -> Value {
    let v = match instance {
        Instance::Knapsack(x) => serde_json::to_value(KnapsackPayload {
            values: x.values().to_vec(),
            sizes: x.sizes().to_vec(),
            capacity: x.capacity(),
        }),
        Instance::Graph(g) => serde_json::to_value(GraphPayload {
            n: g.n(),
            weights: g.weights().to_vec(),
            edges: g.edges().to_vec(),
            edge_weights: g.edge_weights().to_vec(),
        }),
        Instance::Clustering(x) => serde_json::to_value(ClusteringPayload {
            n: x.n(),
            dist: x.rows(),
            k: x.k(),
            ground_truth: x.ground_truth().map(<[Vec<usize>]>::to_vec),
            max_dist: x.max_dist(),
        }),
        Instance::Iqp(q) => serde_json::to_value(IqpPayload { n: q.n(), a: q.rows() }),
    };
    v.expect("instance payloads contain only finite numbers")
}

fn field_error(record: usize, field: &str, message: impl ToString) -> Error {
    Error::Parse {
        location: Location::Field { record, field: field.to_string() },
        message: message.to_string(),
    }
}

fn decode<T: for<'de> Deserialize<'de>>(record: usize, payload: Value) -> Result<T> {
    serde_json::from_value(payload).map_err(|e| field_error(record, "payload", e))
}

fn instance_of(index: usize, record: Record) -> Result<TapedInstance> {
    let invalid = |e: Error| field_error(index, "payload", e);
    let instance: Instance = match record.kind.as_str() {
        "knapsack" => {
            let p: KnapsackPayload = decode(index, record.payload)?;
            KnapsackInstance::new(p.values, p.sizes, p.capacity).map_err(invalid)?.into()
        }
        "graph" => {
            let p: GraphPayload = decode(index, record.payload)?;
            if p.edges.len() != p.edge_weights.len() {
                return Err(field_error(index, "payload.edge_weights", "length differs from edges"));
            }
            let edges = p.edges.iter().zip(&p.edge_weights).map(|(&(a, b), &w)| (a, b, w)).collect();
            GraphInstance::new_weighted(p.n, p.weights, edges).map_err(invalid)?.into()
        }
        "clustering" => {
            let p: ClusteringPayload = decode(index, record.payload)?;
            if p.dist.len() != p.n || p.dist.iter().any(|r| r.len() != p.n) {
                return Err(field_error(index, "payload.dist", format!("expected a {0}×{0} matrix", p.n)));
            }
            ClusteringInstance::new(p.n, p.dist.concat(), p.k, p.ground_truth, p.max_dist)
                .map_err(invalid)?
                .into()
        }
        "iqp" => {
            let p: IqpPayload = decode(index, record.payload)?;
            if p.a.len() != p.n {
                return Err(field_error(index, "payload.a", format!("expected {} rows", p.n)));
            }
            IqpInstance::from_rows(&p.a).map_err(invalid)?.into()
        }
        other => return Err(Error::UnsupportedKind(other.to_string())),
    };
    Ok(TapedInstance { instance, tape: record.tape })
}

/// Encodes instances as a pretty-printed JSON array.
pub fn instances_to_string(instances: &[TapedInstance]) -> String {
    let records: Vec<Record> = instances
        .iter()
        .map(|x| Record {
            kind: x.instance.kind().to_string(),
            payload: payload_of(&x.instance),
            tape: x.tape,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&records).expect("records serialize");
    s.push('\n');
    s
}

pub fn instances_from_str(text: &str) -> Result<Vec<TapedInstance>> {
    let records: Vec<Record> = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: Location::Text { line: e.line(), column: e.column() },
        message: e.to_string(),
    })?;
    records.into_iter().enumerate().map(|(i, r)| instance_of(i, r)).collect()
}

pub fn write_instances(instances: &[TapedInstance], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, instances_to_string(instances))?;
    Ok(())
}

pub fn read_instances(path: impl AsRef<Path>) -> Result<Vec<TapedInstance>> {
    instances_from_str(&fs::read_to_string(path)?)
}
