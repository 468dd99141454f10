use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Quantum { qubits: u64 },
    Classical { bits: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub from: Party,
    pub payload: Payload,
}

impl Message {
    pub fn quantum(from: Party, qubits: u64) -> Self {
        Self { from, payload: Payload::Quantum { qubits } }
    }

    pub fn classical(from: Party, bits: u64) -> Self {
        Self { from, payload: Payload::Classical { bits } }
    }
}

/// One line of the protocol trace. Repeated patterns are logged once with
/// their repetition count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub event: String,
    pub speaker: Party,
    pub width: u64,
    pub round: u64,
    pub repeat: u64,
}

/// Exact communication counts of a protocol run.
///
/// `rounds` counts maximal runs of messages from the same speaker, so two
/// consecutive messages from Alice share a round. Merging ledgers adds all
/// counts and forgets the last speaker, so merge is associative and
/// commutative.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CommLedger {
    pub quantum_messages: u64,
    pub qubits_sent: u64,
    pub classical_bits: u64,
    pub rounds: u64,
    pub theoretical_counters: BTreeMap<String, f64>,
    #[serde(skip)]
    pub classical_messages: u64,
    #[serde(skip)]
    last_speaker: Option<Party>,
    #[serde(skip)]
    trace: Option<Vec<TraceEvent>>,
}

impl CommLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// A ledger that also keeps an event trace.
    pub fn traced() -> Self {
        Self { trace: Some(Vec::new()), ..Self::default() }
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.quantum_messages == 0 && self.classical_messages == 0 && self.classical_bits == 0
    }

    pub fn messages(&self) -> u64 {
        self.quantum_messages + self.classical_messages
    }

    pub fn send(&mut self, msg: Message) {
        self.send_pattern(&[msg], 1);
    }

    pub fn send_qubits(&mut self, from: Party, qubits: u64) {
        self.send(Message::quantum(from, qubits));
    }

    pub fn send_bits(&mut self, from: Party, bits: u64) {
        self.send(Message::classical(from, bits));
    }

    /// Charges `pattern` repeated `repeats` times back to back.
    pub fn send_pattern(&mut self, pattern: &[Message], repeats: u64) {
        if pattern.is_empty() || repeats == 0 {
            return;
        }
        let first = pattern[0].from;
        let last = pattern[pattern.len() - 1].from;
        let runs = 1 + pattern.windows(2).filter(|w| w[0].from != w[1].from).count() as u64;
        let head = runs - u64::from(self.last_speaker == Some(first));
        let tail = runs - u64::from(last == first);
        if let Some(trace) = self.trace.as_mut() {
            let mut round = self.rounds + u64::from(self.last_speaker != Some(first));
            for (i, m) in pattern.iter().enumerate() {
                if i > 0 && pattern[i - 1].from != m.from {
                    round += 1;
                }
                let (event, width) = match m.payload {
                    Payload::Quantum { qubits } => ("quantum", qubits),
                    Payload::Classical { bits } => ("classical", bits),
                };
                trace.push(TraceEvent { event: event.into(), speaker: m.from, width, round, repeat: repeats });
            }
        }
        self.rounds += head + (repeats - 1) * tail;
        for m in pattern {
            match m.payload {
                Payload::Quantum { qubits } => {
                    self.quantum_messages += repeats;
                    self.qubits_sent += repeats * qubits;
                }
                Payload::Classical { bits } => {
                    self.classical_messages += repeats;
                    self.classical_bits += repeats * bits;
                }
            }
        }
        self.last_speaker = Some(last);
    }

    /// `count` alternating quantum messages of `width` qubits starting with
    /// `first`, the whole sequence repeated `repeats` times.
    pub fn send_relay(&mut self, first: Party, count: usize, width: u64, repeats: u64) {
        let mut speaker = first;
        let pattern: Vec<Message> = (0..count)
            .map(|_| {
                let m = Message::quantum(speaker, width);
                speaker = speaker.other();
                m
            })
            .collect();
        self.send_pattern(&pattern, repeats);
    }

    pub fn set_counter(&mut self, name: &str, value: f64) {
        self.theoretical_counters.insert(name.to_string(), value);
    }

    pub fn merge(&mut self, other: &CommLedger) {
        self.quantum_messages += other.quantum_messages;
        self.qubits_sent += other.qubits_sent;
        self.classical_bits += other.classical_bits;
        self.classical_messages += other.classical_messages;
        self.rounds += other.rounds;
        for (k, v) in &other.theoretical_counters {
            *self.theoretical_counters.entry(k.clone()).or_insert(0.0) += v;
        }
        if let (Some(mine), Some(theirs)) = (self.trace.as_mut(), other.trace.as_ref()) {
            mine.extend(theirs.iter().cloned());
        }
        self.last_speaker = None;
    }

    pub fn merged(mut self, other: &CommLedger) -> CommLedger {
        self.merge(other);
        self
    }

    /// Trace as line-delimited JSON.
    pub fn trace_log(&self) -> String {
        self.trace()
            .iter()
            .map(|e| serde_json::to_string(e).expect("trace events serialize") + "\n")
            .collect()
    }
}

/// Information-leakage bound derived from a ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub bits_bound: u64,
    pub bits_per_qubit: u64,
    pub note: String,
}

/// Upper bound on classical bits extractable from the transcript: one bit per
/// transmitted qubit (no shared entanglement assumed) plus every classical bit.
pub fn privacy_report(ledger: &CommLedger) -> PrivacyReport {
    PrivacyReport {
        bits_bound: ledger.qubits_sent + ledger.classical_bits,
        bits_per_qubit: 1,
        note: "Holevo cap of 1 bit per qubit without entanglement assistance; dense coding would double the quantum term".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rounds_count_speaker_changes() {
        let mut l = CommLedger::new();
        l.send_qubits(Party::Alice, 3);
        l.send_qubits(Party::Alice, 3);
        l.send_bits(Party::Bob, 1);
        l.send_qubits(Party::Alice, 2);
        assert_eq!(l.rounds, 3);
        assert_eq!(l.quantum_messages, 3);
        assert_eq!(l.qubits_sent, 8);
        assert_eq!(l.classical_bits, 1);
        assert!(l.rounds <= l.messages());
    }

    #[test]
    fn relay_repeats_match_one_by_one() {
        for count in 1..6 {
            let mut bulk = CommLedger::new();
            bulk.send_bits(Party::Alice, 1);
            bulk.send_relay(Party::Alice, count, 4, 7);
            let mut single = CommLedger::new();
            single.send_bits(Party::Alice, 1);
            for _ in 0..7 {
                let mut s = Party::Alice;
                for _ in 0..count {
                    single.send_qubits(s, 4);
                    s = s.other();
                }
            }
            assert_eq!(bulk, single, "count {count}");
        }
    }

    #[test]
    fn privacy_of_empty_ledger() {
        assert_eq!(privacy_report(&CommLedger::new()).bits_bound, 0);
    }

    #[test]
    fn json_field_names() {
        let mut l = CommLedger::new();
        l.send_qubits(Party::Alice, 2);
        l.set_counter("k_theory", 5.0);
        let v: serde_json::Value = serde_json::to_value(&l).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["classical_bits", "quantum_messages", "qubits_sent", "rounds", "theoretical_counters"]);
    }

    #[test]
    fn trace_rounds_and_repeats() {
        let mut l = CommLedger::traced();
        l.send_relay(Party::Alice, 2, 3, 5);
        let t = l.trace();
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].speaker, t[0].round, t[0].repeat), (Party::Alice, 1, 5));
        assert_eq!((t[1].speaker, t[1].round), (Party::Bob, 2));
        assert_eq!(l.rounds, 10);
    }

    fn arb_ledger() -> impl Strategy<Value = CommLedger> {
        proptest::collection::vec((any::<bool>(), any::<bool>(), 1u64..9), 0..12).prop_map(|msgs| {
            let mut l = CommLedger::new();
            for (alice, quantum, w) in msgs {
                let p = if alice { Party::Alice } else { Party::Bob };
                if quantum { l.send_qubits(p, w) } else { l.send_bits(p, w) }
            }
            l
        })
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_associative(a in arb_ledger(), b in arb_ledger(), c in arb_ledger()) {
            prop_assert_eq!(a.clone().merged(&b), b.clone().merged(&a));
            prop_assert_eq!(a.clone().merged(&b).merged(&c), a.clone().merged(&b.clone().merged(&c)));
        }

        #[test]
        fn privacy_monotone_under_merge(a in arb_ledger(), b in arb_ledger()) {
            let merged = a.clone().merged(&b);
            prop_assert!(privacy_report(&merged).bits_bound >= privacy_report(&a).bits_bound);
            prop_assert_eq!(privacy_report(&merged).bits_bound, privacy_report(&a).bits_bound + privacy_report(&b).bits_bound);
        }
    }
}
