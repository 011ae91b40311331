use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{check_alice, check_bob, AliceMove, AlicePolicy, Ball, BobPolicy, GameConfig, GameView, Point, Verdict};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mover {
    Alice,
    Bob,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveRecord {
    Alice(AliceMove),
    Bob(Ball),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub mover: Mover,
    #[serde(rename = "move")]
    pub mv: MoveRecord,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// The radius fell to the floor; the limit point is within `radius` of `center`.
    Point { center: Point, radius: f64 },
    /// The round limit was reached first.
    Region { ball: Ball },
    IllegalMove { mover: Mover, round: usize, reason: String },
    NoLegalMove { mover: Mover, round: usize },
    PolicyFault { mover: Mover, round: usize, message: String },
}

impl Outcome {
    /// The last ball's center, for outcomes that have one.
    pub fn center(&self) -> Option<&Point> {
        match self {
            Outcome::Point { center, .. } => Some(center),
            Outcome::Region { ball } => Some(&ball.center),
            _ => None,
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, Outcome::Point { .. } | Outcome::Region { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transcript {
    pub config: GameConfig,
    pub alice: String,
    pub bob: String,
    pub records: Vec<RoundRecord>,
    pub outcome: Outcome,
}

impl Transcript {
    /// Bob's balls in order, starting with the domain.
    pub fn balls(&self) -> Vec<&Ball> {
        self.records
            .iter()
            .filter_map(|r| match &r.mv {
                MoveRecord::Bob(b) => Some(b),
                _ => None,
            })
            .collect()
    }

    pub fn alice_moves(&self) -> Vec<&AliceMove> {
        self.records
            .iter()
            .filter_map(|r| match &r.mv {
                MoveRecord::Alice(a) => Some(a),
                _ => None,
            })
            .collect()
    }

    /// Consecutive balls are nested and radii never increase.
    pub fn is_nested(&self) -> bool {
        let b = self.balls();
        b.windows(2).all(|w| {
            w[1].radius <= w[0].radius && w[1].inside(w[0], super::SLACK * w[0].radius)
        })
    }

    /// Line-delimited JSON: a header, one line per move, then the outcome.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let header = json!({
            "type": "header",
            "config": self.config,
            "alice": self.alice,
            "bob": self.bob,
        });
        out.push_str(&header.to_string());
        out.push('\n');
        for r in &self.records {
            let mut v = serde_json::to_value(r).expect("serializable");
            v["type"] = json!("move");
            out.push_str(&v.to_string());
            out.push('\n');
        }
        let o = json!({ "type": "outcome", "outcome": self.outcome });
        out.push_str(&o.to_string());
        out.push('\n');
        out
    }
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| e.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "policy panicked".into())
}

/// Run one game. Bob's first move is the configured domain.
pub fn play(alice: &mut dyn AlicePolicy, bob: &mut dyn BobPolicy, cfg: &GameConfig) -> Result<Transcript> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut balls = vec![cfg.domain.clone()];
    let mut records = vec![RoundRecord {
        round: 0,
        mover: Mover::Bob,
        mv: MoveRecord::Bob(cfg.domain.clone()),
        verdict: Verdict::Legal,
    }];
    let (alice_name, bob_name) = (alice.name(), bob.name());
    let mut outcome = None;
    for round in 1..=cfg.max_rounds {
        let current = balls.last().expect("nonempty").clone();
        if current.radius <= cfg.radius_floor {
            outcome = Some(Outcome::Point { center: current.center.clone(), radius: current.radius });
            break;
        }
        let view = GameView { config: cfg, round, ball: &current, history: &balls };
        let mv = match catch_unwind(AssertUnwindSafe(|| alice.play(&view))) {
            Ok(mv) => mv,
            Err(e) => {
                outcome = Some(Outcome::PolicyFault { mover: Mover::Alice, round, message: panic_message(e) });
                break;
            }
        };
        let verdict = check_alice(cfg, &current, &mv)?;
        records.push(RoundRecord { round, mover: Mover::Alice, mv: MoveRecord::Alice(mv.clone()), verdict: verdict.clone() });
        if let Verdict::Illegal(reason) = verdict {
            outcome = Some(Outcome::IllegalMove { mover: Mover::Alice, round, reason });
            break;
        }
        let next = match catch_unwind(AssertUnwindSafe(|| bob.play(&view, &mv, &mut rng))) {
            Ok(Some(b)) => b,
            Ok(None) => {
                outcome = Some(Outcome::NoLegalMove { mover: Mover::Bob, round });
                break;
            }
            Err(e) => {
                outcome = Some(Outcome::PolicyFault { mover: Mover::Bob, round, message: panic_message(e) });
                break;
            }
        };
        let verdict = check_bob(cfg, &current, &mv, &next)?;
        records.push(RoundRecord { round, mover: Mover::Bob, mv: MoveRecord::Bob(next.clone()), verdict: verdict.clone() });
        if let Verdict::Illegal(reason) = verdict {
            outcome = Some(Outcome::IllegalMove { mover: Mover::Bob, round, reason });
            break;
        }
        balls.push(next);
    }
    let outcome = outcome.unwrap_or_else(|| {
        let last = balls.last().expect("nonempty").clone();
        if last.radius <= cfg.radius_floor {
            Outcome::Point { center: last.center.clone(), radius: last.radius }
        } else {
            Outcome::Region { ball: last }
        }
    });
    Ok(Transcript { config: cfg.clone(), alice: alice_name, bob: bob_name, records, outcome })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{RandomAlice, RandomBob, Variant};

    struct Panicky;
    impl AlicePolicy for Panicky {
        fn name(&self) -> String {
            "panicky".into()
        }
        fn play(&mut self, _: &GameView) -> AliceMove {
            panic!("boom")
        }
    }

    fn cfg(v: Variant, d: usize, seed: u64) -> GameConfig {
        let dom = Ball::new(Point::origin(d).unwrap(), 1.0).unwrap();
        GameConfig::new(v, dom, 30, 0.0, seed).unwrap()
    }

    #[test]
    fn panics_become_faults() {
        let c = cfg(Variant::Haw { beta: 0.3 }, 2, 1);
        let t = play(&mut Panicky, &mut RandomBob::default(), &c).unwrap();
        assert!(matches!(t.outcome, Outcome::PolicyFault { mover: Mover::Alice, round: 1, .. }));
    }

    #[test]
    fn same_seed_same_transcript() {
        for v in [Variant::Haw { beta: 0.3 }, Variant::Hpw { beta: 0.1 }, Variant::Classic { alpha: 0.5, beta: 0.4 }] {
            let c = cfg(v, 2, 7);
            let a = play(&mut RandomAlice::new(7), &mut RandomBob::default(), &c).unwrap();
            let b = play(&mut RandomAlice::new(7), &mut RandomBob::default(), &c).unwrap();
            assert_eq!(a.to_jsonl(), b.to_jsonl());
            assert!(a.is_nested());
            assert!(a.outcome.is_completed(), "{:?}", a.outcome);
        }
    }

    #[test]
    fn jsonl_has_header_and_outcome() {
        let c = cfg(Variant::Haw { beta: 0.2 }, 1, 3);
        let t = play(&mut RandomAlice::new(3), &mut RandomBob::default(), &c).unwrap();
        let text = t.to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].contains("\"header\""));
        assert!(lines.last().unwrap().contains("\"outcome\""));
        for l in &lines {
            serde_json::from_str::<serde_json::Value>(l).unwrap();
        }
    }
}
