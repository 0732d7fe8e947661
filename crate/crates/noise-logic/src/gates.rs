//! Threshold neurons and the circuits built from them.
//!
//! A neuron here is a coincidence unit: it fires in a slot exactly when at
//! least `threshold` of its excitatory inputs are active and none of its
//! inhibitory inputs is. Circuits are acyclic by construction (a neuron may
//! only reference ports or earlier neurons) and are evaluated slot by slot
//! with zero propagation delay.
//!
//! The XOR block is the canonical three-neuron realization: two mutually
//! inhibiting AND-NOT units feeding an OR. `build_xor_fold` chains blocks
//! into a balanced tree that computes N-way parity.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::spikes::SpikeTrain;
use crate::{Error, Result};

/// Where a neuron input comes from: an external port or an earlier neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalRef {
    Port(usize),
    Neuron(usize),
}

impl fmt::Display for SignalRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalRef::Port(i) => write!(f, "port #{i}"),
            SignalRef::Neuron(i) => write!(f, "neuron #{i}"),
        }
    }
}

/// One threshold unit: excitatory inputs, inhibitory inputs, and the firing
/// threshold over the excitatory count.
#[derive(Debug, Clone)]
pub struct NeuronSpec {
    excitatory: Vec<SignalRef>,
    inhibitory: Vec<SignalRef>,
    threshold: usize,
}

impl NeuronSpec {
    /// Requires at least one excitatory input and
    /// `1 <= threshold <= excitatory.len()`.
    pub fn new(
        excitatory: Vec<SignalRef>,
        inhibitory: Vec<SignalRef>,
        threshold: usize,
    ) -> Result<Self> {
        if excitatory.is_empty() {
            return Err(Error::InvalidNeuron(
                "at least one excitatory input required".into(),
            ));
        }
        if threshold == 0 || threshold > excitatory.len() {
            return Err(Error::InvalidNeuron(format!(
                "threshold {threshold} outside 1..={}",
                excitatory.len()
            )));
        }
        Ok(Self {
            excitatory,
            inhibitory,
            threshold,
        })
    }

    pub fn excitatory(&self) -> &[SignalRef] {
        &self.excitatory
    }

    pub fn inhibitory(&self) -> &[SignalRef] {
        &self.inhibitory
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    fn fires_with<F: Fn(SignalRef) -> bool>(&self, active: F) -> bool {
        let vetoed = self.inhibitory.iter().any(|&r| active(r));
        if vetoed {
            return false;
        }
        let excited = self.excitatory.iter().filter(|&&r| active(r)).count();
        excited >= self.threshold
    }
}

/// Evaluates one neuron against an explicit activity map. Fires iff the
/// active excitatory count reaches the threshold and no inhibitory input is
/// active.
pub fn step_neuron(spec: &NeuronSpec, active: &HashMap<SignalRef, bool>) -> Result<bool> {
    for &r in spec.excitatory().iter().chain(spec.inhibitory()) {
        if !active.contains_key(&r) {
            return Err(Error::UnresolvedReference(r.to_string()));
        }
    }
    Ok(spec.fires_with(|r| active[&r]))
}

/// Acyclic network of threshold neurons over named input ports.
#[derive(Debug, Clone)]
pub struct Circuit {
    ports: Vec<String>,
    neuron_ids: Vec<String>,
    neurons: Vec<NeuronSpec>,
    output: SignalRef,
}

impl Circuit {
    /// Creates an empty circuit over the given ports; the provisional output
    /// is port 0 until `set_output` is called.
    pub fn new<I, S>(ports: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ports: Vec<String> = ports.into_iter().map(Into::into).collect();
        if ports.is_empty() {
            return Err(Error::InvalidCircuit("at least one port required".into()));
        }
        let mut seen = HashSet::new();
        for name in &ports {
            if name.is_empty() || !seen.insert(name.clone()) {
                return Err(Error::InvalidCircuit(format!(
                    "port names must be unique and non-empty (got '{name}')"
                )));
            }
        }
        Ok(Self {
            ports,
            neuron_ids: Vec::new(),
            neurons: Vec::new(),
            output: SignalRef::Port(0),
        })
    }

    /// Appends a neuron whose inputs may reference ports or already-pushed
    /// neurons, keeping the network acyclic. Returns the new neuron's ref.
    pub fn push_neuron(&mut self, spec: NeuronSpec) -> Result<SignalRef> {
        for &r in spec.excitatory().iter().chain(spec.inhibitory()) {
            self.check_ref(r)?;
        }
        let idx = self.neurons.len();
        self.neuron_ids.push(format!("n{idx}"));
        self.neurons.push(spec);
        Ok(SignalRef::Neuron(idx))
    }

    pub fn set_output(&mut self, output: SignalRef) -> Result<()> {
        self.check_ref(output)?;
        self.output = output;
        Ok(())
    }

    fn check_ref(&self, r: SignalRef) -> Result<()> {
        let ok = match r {
            SignalRef::Port(i) => i < self.ports.len(),
            SignalRef::Neuron(i) => i < self.neurons.len(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnresolvedReference(r.to_string()))
        }
    }

    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    pub fn output(&self) -> SignalRef {
        self.output
    }

    /// Longest reference chain from a port to the output, in neuron levels.
    pub fn depth(&self) -> usize {
        let mut depths = Vec::with_capacity(self.neurons.len());
        for spec in &self.neurons {
            let d = spec
                .excitatory
                .iter()
                .chain(&spec.inhibitory)
                .map(|&r| match r {
                    SignalRef::Port(_) => 0,
                    SignalRef::Neuron(i) => depths[i],
                })
                .max()
                .unwrap_or(0);
            depths.push(d + 1);
        }
        match self.output {
            SignalRef::Port(_) => 0,
            SignalRef::Neuron(i) => depths[i],
        }
    }

    /// Single-slot combinational evaluation from port values.
    pub fn evaluate(&self, port_values: &[bool]) -> Result<bool> {
        let mut scratch = Vec::new();
        self.evaluate_into(port_values, &mut scratch)
    }

    fn evaluate_into(&self, port_values: &[bool], fired: &mut Vec<bool>) -> Result<bool> {
        if port_values.len() != self.ports.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} port values, got {}",
                self.ports.len(),
                port_values.len()
            )));
        }
        fired.clear();
        for spec in &self.neurons {
            let value = spec.fires_with(|r| match r {
                SignalRef::Port(i) => port_values[i],
                SignalRef::Neuron(i) => fired[i],
            });
            fired.push(value);
        }
        Ok(match self.output {
            SignalRef::Port(i) => port_values[i],
            SignalRef::Neuron(i) => fired[i],
        })
    }
}

/// The three-neuron XOR block over ports `x` and `y`:
/// `n0 = x AND NOT y`, `n1 = y AND NOT x`, `n2 = n0 OR n1`.
pub fn build_xor_pair() -> Circuit {
    let mut circuit = Circuit::new(["x", "y"]).expect("static ports");
    let x = SignalRef::Port(0);
    let y = SignalRef::Port(1);
    let n0 = circuit
        .push_neuron(NeuronSpec::new(vec![x], vec![y], 1).expect("static spec"))
        .expect("valid refs");
    let n1 = circuit
        .push_neuron(NeuronSpec::new(vec![y], vec![x], 1).expect("static spec"))
        .expect("valid refs");
    let out = circuit
        .push_neuron(NeuronSpec::new(vec![n0, n1], vec![], 1).expect("static spec"))
        .expect("valid refs");
    circuit.set_output(out).expect("valid output");
    circuit
}

/// Balanced tree of XOR blocks computing the parity of `n` input ports
/// (`x0..x{n-1}`). Uses exactly `n - 1` blocks, 3(n - 1) neurons, and
/// `ceil(log2 n)` block levels; `n = 1` is a wire from the single port.
pub fn build_xor_fold(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidConfig("xor fold needs n >= 1".into()));
    }
    let mut circuit = Circuit::new((0..n).map(|i| format!("x{i}")))?;
    let mut level: Vec<SignalRef> = (0..n).map(SignalRef::Port).collect();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut chunks = level.chunks_exact(2);
        for pair in &mut chunks {
            next.push(push_xor_block(&mut circuit, pair[0], pair[1])?);
        }
        // An odd operand carries to the next level unchanged.
        next.extend(chunks.remainder());
        level = next;
    }
    circuit.set_output(level[0])?;
    Ok(circuit)
}

fn push_xor_block(circuit: &mut Circuit, a: SignalRef, b: SignalRef) -> Result<SignalRef> {
    let n0 = circuit.push_neuron(NeuronSpec::new(vec![a], vec![b], 1)?)?;
    let n1 = circuit.push_neuron(NeuronSpec::new(vec![b], vec![a], 1)?)?;
    let out = circuit.push_neuron(NeuronSpec::new(vec![n0, n1], vec![], 1)?)?;
    Ok(out)
}

/// Clocked run: evaluates the circuit independently at every slot and
/// collects the output neuron's firing into a train. All bound trains must
/// share one length.
pub fn run_circuit(circuit: &Circuit, inputs: &HashMap<&str, &SpikeTrain>) -> Result<SpikeTrain> {
    let mut bound = Vec::with_capacity(circuit.ports().len());
    for port in circuit.ports() {
        let train = *inputs
            .get(port.as_str())
            .ok_or_else(|| Error::UnboundPort(port.clone()))?;
        bound.push(train);
    }
    let n_steps = bound[0].len();
    for train in &bound {
        if train.len() != n_steps {
            return Err(Error::LengthMismatch {
                expected: n_steps,
                actual: train.len(),
            });
        }
    }

    let mut out_bits = vec![false; n_steps];
    let mut port_values = vec![false; bound.len()];
    let mut scratch = Vec::with_capacity(circuit.neuron_count());
    for (t, out) in out_bits.iter_mut().enumerate() {
        for (v, train) in port_values.iter_mut().zip(&bound) {
            *v = train.get(t);
        }
        *out = circuit.evaluate_into(&port_values, &mut scratch)?;
    }
    Ok(SpikeTrain::from_bools(&out_bits))
}

// ── Circuit description file ─────────────────────────────────────────────
//
// JSON with neurons listed in topological order:
// {"inputs": ["x", "y"],
//  "neurons": [{"id": "n0", "excitatory": ["x"], "inhibitory": ["y"],
//               "threshold": 1}, ...],
//  "output": "n2"}

#[derive(Serialize, Deserialize)]
struct CircuitFile {
    inputs: Vec<String>,
    neurons: Vec<NeuronFile>,
    output: String,
}

#[derive(Serialize, Deserialize)]
struct NeuronFile {
    id: String,
    excitatory: Vec<String>,
    inhibitory: Vec<String>,
    threshold: usize,
}

impl Circuit {
    pub fn write_json<W: Write>(&self, w: &mut W) -> Result<()> {
        let name_of = |r: SignalRef| -> String {
            match r {
                SignalRef::Port(i) => self.ports[i].clone(),
                SignalRef::Neuron(i) => self.neuron_ids[i].clone(),
            }
        };
        let file = CircuitFile {
            inputs: self.ports.clone(),
            neurons: self
                .neurons
                .iter()
                .zip(&self.neuron_ids)
                .map(|(spec, id)| NeuronFile {
                    id: id.clone(),
                    excitatory: spec.excitatory.iter().map(|&r| name_of(r)).collect(),
                    inhibitory: spec.inhibitory.iter().map(|&r| name_of(r)).collect(),
                    threshold: spec.threshold,
                })
                .collect(),
            output: name_of(self.output),
        };
        serde_json::to_writer_pretty(&mut *w, &file)?;
        writeln!(w)?;
        Ok(())
    }

    /// Loads and validates a circuit description: unique ids, references
    /// only to ports or earlier neurons (which makes the file acyclic by
    /// construction), and threshold invariants.
    pub fn read_json<R: Read>(r: R) -> Result<Circuit> {
        let file: CircuitFile = serde_json::from_reader(r)?;
        let mut circuit = Circuit::new(file.inputs.clone())?;

        let mut by_name: HashMap<String, SignalRef> = HashMap::new();
        for (i, port) in file.inputs.iter().enumerate() {
            by_name.insert(port.clone(), SignalRef::Port(i));
        }
        for neuron in &file.neurons {
            if by_name.contains_key(&neuron.id) {
                return Err(Error::InvalidCircuit(format!(
                    "duplicate id '{}'",
                    neuron.id
                )));
            }
            let resolve = |names: &[String]| -> Result<Vec<SignalRef>> {
                names
                    .iter()
                    .map(|name| {
                        by_name
                            .get(name)
                            .copied()
                            .ok_or_else(|| Error::UnresolvedReference(name.clone()))
                    })
                    .collect()
            };
            let spec = NeuronSpec::new(
                resolve(&neuron.excitatory)?,
                resolve(&neuron.inhibitory)?,
                neuron.threshold,
            )?;
            let r = circuit.push_neuron(spec)?;
            let idx = circuit.neurons.len() - 1;
            circuit.neuron_ids[idx] = neuron.id.clone();
            by_name.insert(neuron.id.clone(), r);
        }
        let output = by_name
            .get(&file.output)
            .copied()
            .ok_or_else(|| Error::UnresolvedReference(file.output.clone()))?;
        circuit.set_output(output)?;
        Ok(circuit)
    }
}
