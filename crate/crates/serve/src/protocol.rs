//! WebSocket messages. Every message carries the protocol version.

use serde::{Deserialize, Serialize};
use teachkit_core::session::{Phase, RoundSpec, PROTOCOL};

fn protocol() -> u32 {
    PROTOCOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMsg {
    Action {
        #[serde(default = "protocol")]
        protocol: u32,
        values: Vec<f64>,
    },
    PenUp {
        #[serde(default = "protocol")]
        protocol: u32,
    },
}

impl ClientMsg {
    pub fn action(values: Vec<f64>) -> Self {
        ClientMsg::Action {
            protocol: PROTOCOL,
            values,
        }
    }

    pub fn pen_up() -> Self {
        ClientMsg::PenUp { protocol: PROTOCOL }
    }

    pub fn protocol(&self) -> u32 {
        match self {
            ClientMsg::Action { protocol, .. } | ClientMsg::PenUp { protocol } => *protocol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMsg {
    Round {
        protocol: u32,
        spec: RoundSpec,
    },
    State {
        protocol: u32,
        round: usize,
        state: Vec<f64>,
        reward_display: f64,
        steps_left: usize,
        /// Set on demo playback frames.
        playback: bool,
        /// Set on the last state of a round.
        terminal: bool,
    },
    Score {
        protocol: u32,
        round: usize,
        value: f64,
    },
    Phase {
        protocol: u32,
        phase: Phase,
    },
    /// An input that was logged and ignored.
    Rejected {
        protocol: u32,
        reason: String,
    },
    /// A request the session cannot serve in its current state.
    Error {
        protocol: u32,
        message: String,
    },
}

impl ServerMsg {
    pub fn is_playback(&self) -> bool {
        matches!(self, ServerMsg::State { playback: true, .. })
    }
}
