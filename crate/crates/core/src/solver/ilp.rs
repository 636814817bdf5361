//! The 0-1 program for the median: one `a` variable per candidate gene, one
//! `b` variable per conserved candidate adjacency, and the three families of
//! constraints (extant gene used once, adjacency needs both genes, candidate
//! extremity used once).

use std::fmt::Write as _;

use serde::Serialize;

use crate::candidates::CandidateSet;
use crate::instance::Instance;

use super::lp_format::{LpConstraint, LpProblem, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowKind {
    /// Each extant gene belongs to at most one chosen candidate.
    GeneUse,
    /// A chosen adjacency requires both of its candidate genes.
    Link,
    /// Each candidate extremity takes part in at most one adjacency.
    Extremity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    pub a_terms: Vec<(usize, i64)>,
    pub b_terms: Vec<(usize, i64)>,
    pub rhs: i64,
}

#[derive(Debug, Clone)]
pub struct IlpModel {
    pub candidates: CandidateSet,
    pub a_names: Vec<String>,
    pub b_names: Vec<String>,
    pub rows: Vec<Row>,
}

/// Escapes a gene name into `[A-Za-z0-9.~]`; every other byte becomes `~hh`.
pub fn escape_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for byte in name.bytes() {
        if byte.is_ascii_alphanumeric() || byte == b'.' {
            out.push(byte as char);
        } else {
            let _ = write!(out, "~{byte:02x}");
        }
    }
    out
}

fn member_parts(set: &CandidateSet, instance: &Instance, m: usize) -> [String; 3] {
    let members = set.genes[m].members;
    [0, 1, 2].map(|x| escape_name(&instance.genomes[x].gene(members[x]).name))
}

pub fn build_ilp(set: &CandidateSet, instance: &Instance) -> IlpModel {
    let parts: Vec<[String; 3]> = (0..set.genes.len()).map(|m| member_parts(set, instance, m)).collect();
    let a_names: Vec<String> = parts.iter().map(|[g, h, i]| format!("a_{g}_{h}_{i}")).collect();
    let b_names: Vec<String> = set
        .adjacencies
        .iter()
        .map(|adj| {
            let (p, q) = (&parts[adj.first.gene], &parts[adj.second.gene]);
            let (a, b) = (adj.first.end.symbol(), adj.second.end.symbol());
            format!("b_{}{a}_{}{b}_{}{a}_{}{b}_{}{a}_{}{b}", p[0], q[0], p[1], q[1], p[2], q[2])
        })
        .collect();

    let mut rows = Vec::new();
    for (x, gene, users) in set.conflict_index().contested() {
        rows.push(Row {
            name: format!(
                "c01_{}_{}",
                escape_name(instance.genomes[x].label()),
                escape_name(&instance.genomes[x].gene(gene).name)
            ),
            kind: RowKind::GeneUse,
            a_terms: users.iter().map(|&m| (m, 1)).collect(),
            b_terms: Vec::new(),
            rhs: 1,
        });
    }
    for (k, adj) in set.adjacencies.iter().enumerate() {
        let a_terms = if adj.is_self_pairing() {
            vec![(adj.first.gene, -2)]
        } else {
            vec![(adj.first.gene, -1), (adj.second.gene, -1)]
        };
        rows.push(Row { name: format!("c02_{k}"), kind: RowKind::Link, a_terms, b_terms: vec![(k, 2)], rhs: 0 });
    }
    for (m, gene) in set.genes.iter().enumerate() {
        for &end in gene.ends() {
            let incident = set.incident(m, end);
            if incident.len() < 2 {
                continue;
            }
            let [g, h, i] = &parts[m];
            rows.push(Row {
                name: format!("c03_{g}_{h}_{i}_{}", end.symbol()),
                kind: RowKind::Extremity,
                a_terms: Vec::new(),
                b_terms: incident.iter().map(|&k| (k, 1)).collect(),
                rhs: 1,
            });
        }
    }
    IlpModel { candidates: set.clone(), a_names, b_names, rows }
}

impl IlpModel {
    pub fn variable_count(&self) -> usize {
        self.a_names.len() + self.b_names.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.rows.len()
    }

    /// Variables plus constraints.
    pub fn size(&self) -> usize {
        self.variable_count() + self.constraint_count()
    }

    pub fn b_coefficient(&self, k: usize) -> f64 {
        self.candidates.adjacencies[k].weight()
    }

    pub fn rows_of(&self, kind: RowKind) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    pub fn to_lp(&self) -> LpProblem {
        let objective = (0..self.b_names.len()).map(|k| (self.b_coefficient(k), self.b_names[k].clone())).collect();
        let constraints = self
            .rows
            .iter()
            .map(|row| {
                let mut terms: Vec<(i64, String)> =
                    row.b_terms.iter().map(|&(k, c)| (c, self.b_names[k].clone())).collect();
                terms.extend(row.a_terms.iter().map(|&(m, c)| (c, self.a_names[m].clone())));
                LpConstraint { name: row.name.clone(), terms, sense: Sense::Le, rhs: row.rhs }
            })
            .collect();
        let binaries = self.a_names.iter().chain(&self.b_names).cloned().collect();
        LpProblem { objective, constraints, binaries }
    }

    /// Objective of an assignment given as chosen `b` indices.
    pub fn objective_of(&self, adjacencies: &[usize]) -> f64 {
        adjacencies.iter().map(|&k| self.b_coefficient(k)).sum()
    }

    /// Number of candidate extremities (two per gene, one per telomere).
    pub fn extremity_count(&self) -> usize {
        self.candidates.genes.iter().map(|g| if g.telomere { 1 } else { 2 }).sum()
    }
}

/// Analytic size bound `7 n^5` for `n >= 2` the largest genome size,
/// telomeres included: at most `n^3` candidates and `2 n^3` extremity rows,
/// at most `n^4` candidate pairs per extant adjacency and `n` adjacencies
/// per genome (so `3 n^5` `b` variables and as many link rows), and at most
/// `3 n` gene-use rows.
pub fn size_bound(n: usize) -> usize {
    7 * n.pow(5)
}
