//! Editing sessions: one graph, a mode, and a revision counter that clients
//! echo back so out-of-order commands are refused.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::engine::{EditCommand, EditEngine, Mode, Outcome, Rejection};
use crate::model::AxiomGraph;
use crate::store::OntologyStore;
use crate::textgen;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("stale revision: the command was based on revision {sent}, the session is at {current}")]
    StaleRevision { sent: u64, current: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionInfo {
    pub rule: String,
    pub message: String,
}

impl From<&Rejection> for RejectionInfo {
    fn from(r: &Rejection) -> Self {
        RejectionInfo {
            rule: r.rule().to_string(),
            message: r.to_string(),
        }
    }
}

/// The current text of the axiom, or why there is none yet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum WsmlState {
    Text(String),
    Incomplete(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandResponse {
    pub revision: u64,
    pub committed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection: Option<RejectionInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    pub wsml: WsmlState,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: Uuid,
    pub mode: Mode,
    revision: u64,
    graph: AxiomGraph,
    history: Vec<EditCommand>,
}

impl Session {
    pub fn new(mode: Mode) -> Self {
        Session::with_graph(mode, AxiomGraph::new("axiom"))
    }

    pub fn with_graph(mode: Mode, graph: AxiomGraph) -> Self {
        Session {
            id: Uuid::new_v4(),
            mode,
            revision: 0,
            graph,
            history: Vec::new(),
        }
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn graph(&self) -> &AxiomGraph {
        &self.graph
    }

    /// Committed commands in order.
    pub fn history(&self) -> &[EditCommand] {
        &self.history
    }

    /// Swaps in a loaded graph; counts as one revision.
    pub fn replace_graph(&mut self, graph: AxiomGraph) {
        self.graph = graph;
        self.history.clear();
        self.revision += 1;
    }

    pub fn wsml(&self) -> WsmlState {
        match textgen::generate(&self.graph, false) {
            Ok(expr) => WsmlState::Text(expr.text),
            Err(incomplete) => {
                WsmlState::Incomplete(incomplete.0.iter().map(ToString::to_string).collect())
            }
        }
    }

    /// Applies a command if `revision` matches the session's current one.
    pub fn apply_command(
        &mut self,
        store: &OntologyStore,
        revision: u64,
        command: &EditCommand,
    ) -> Result<CommandResponse, SessionError> {
        if revision != self.revision {
            return Err(SessionError::StaleRevision {
                sent: revision,
                current: self.revision,
            });
        }
        let engine = EditEngine::new(store, self.mode);
        let (committed, rejection, outcome) = match engine.apply(&mut self.graph, command) {
            Ok(outcome) => {
                self.revision += 1;
                self.history.push(command.clone());
                (true, None, Some(outcome))
            }
            Err(r) => (false, Some(RejectionInfo::from(&r)), None),
        };
        Ok(CommandResponse {
            revision: self.revision,
            committed,
            rejection,
            outcome,
            wsml: self.wsml(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::BindingSpec;
    use crate::model::{NodeId, OperatorKind};
    use crate::ontology::{ElementKey, Iri};
    use crate::test_support::fixture_store;

    fn person() -> EditCommand {
        EditCommand::CreateVariable {
            concept: ElementKey::new(Iri::new("http://example.org/sociology").unwrap(), "Person"),
            shared: false,
            at: None,
        }
    }

    #[test]
    fn committed_commands_advance_the_revision() {
        let store = fixture_store();
        let mut session = Session::new(Mode::Standard);
        assert!(matches!(session.wsml(), WsmlState::Incomplete(_)));
        let resp = session.apply_command(&store, 0, &person()).unwrap();
        assert!(resp.committed);
        assert_eq!(resp.revision, 1);
        assert_eq!(resp.wsml, WsmlState::Text("definedBy ?person memberOf Person".into()));
        assert_eq!(session.history().len(), 1);
    }

    #[test]
    fn rejections_keep_the_revision() {
        let store = fixture_store();
        let mut session = Session::new(Mode::Standard);
        session.apply_command(&store, 0, &person()).unwrap();
        let op = EditCommand::CreateOperator {
            operator: OperatorKind::And,
            at: None,
        };
        let resp = session.apply_command(&store, 1, &op).unwrap();
        assert!(!resp.committed);
        assert_eq!(resp.revision, 1);
        assert_eq!(resp.rejection.unwrap().rule, "mode restriction");
    }

    #[test]
    fn stale_revisions_are_refused() {
        let store = fixture_store();
        let mut session = Session::new(Mode::Advanced);
        session.apply_command(&store, 0, &person()).unwrap();
        let refine = EditCommand::RefineAttribute {
            node: NodeId(1),
            slot: 0,
            binding: BindingSpec::DefaultConcept,
            at: None,
        };
        assert_eq!(
            session.apply_command(&store, 0, &refine).unwrap_err(),
            SessionError::StaleRevision { sent: 0, current: 1 }
        );
        assert_eq!(session.graph().node_count(), 2);
    }
}
