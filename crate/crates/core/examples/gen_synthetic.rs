//! Writes the synthetic regression corpus used by the analytics tests.
//!
//! ```text
//! cargo run -p xdialog-core --example gen_synthetic -- crates/core/fixtures/synthetic_398.json
//! ```
//!
//! Dialog counts per type and ending quotas are fixed; everything else is
//! drawn from a seeded generator, so the output is reproducible.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xdialog_core::corpus::{
    CodeLabel as C, CodeOccurrence, CorpusDocument, DialogType, Medium, Participant, Transcript, Utterance,
};
use xdialog_core::protocol::{ActorConstraint, Role};

const SEED: u64 = 398;

struct TypePlan {
    dialog_type: u8,
    transcripts: usize,
    /// Dialogs ending in EXPLANATION, EXPLAINEE_AFFIRMATION, EXPLAINER_AFFIRMATION, other.
    endings: [usize; 4],
    return_question_rate: f64,
    argumentation_rate: f64,
    mid_affirmation_rate: f64,
    medium: Medium,
}

const PLANS: [TypePlan; 6] = [
    TypePlan {
        dialog_type: 1,
        transcripts: 2,
        endings: [40, 14, 22, 12],
        return_question_rate: 0.15,
        argumentation_rate: 0.15,
        mid_affirmation_rate: 0.25,
        medium: Medium::Verbal,
    },
    TypePlan {
        dialog_type: 2,
        transcripts: 3,
        endings: [14, 7, 4, 5],
        return_question_rate: 0.15,
        argumentation_rate: 0.15,
        mid_affirmation_rate: 0.0,
        medium: Medium::Verbal,
    },
    TypePlan {
        dialog_type: 3,
        transcripts: 4,
        endings: [30, 12, 14, 12],
        return_question_rate: 0.55,
        argumentation_rate: 0.0,
        mid_affirmation_rate: 0.1,
        medium: Medium::Text,
    },
    TypePlan {
        dialog_type: 4,
        transcripts: 1,
        endings: [8, 3, 4, 2],
        return_question_rate: 0.1,
        argumentation_rate: 0.0,
        mid_affirmation_rate: 0.1,
        medium: Medium::Text,
    },
    TypePlan {
        dialog_type: 5,
        transcripts: 5,
        endings: [12, 18, 10, 10],
        return_question_rate: 0.1,
        argumentation_rate: 0.2,
        mid_affirmation_rate: 0.1,
        medium: Medium::Text,
    },
    TypePlan {
        dialog_type: 6,
        transcripts: 5,
        endings: [60, 25, 40, 20],
        return_question_rate: 0.2,
        argumentation_rate: 0.15,
        mid_affirmation_rate: 0.6,
        medium: Medium::Verbal,
    },
];

#[derive(Clone, Copy, PartialEq)]
enum Ending {
    Explanation,
    ExplaineeAffirmation,
    ExplainerAffirmation,
    Other,
}

/// One coded utterance before speaker assignment.
struct Turn {
    role: Role,
    text: String,
    codes: Vec<CodeOccurrence>,
}

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    plan: &'a TypePlan,
    turns: Vec<Turn>,
}

const TOPICS: [&str; 8] = [
    "the alarm",
    "the loan decision",
    "the route",
    "the diagnosis",
    "the score",
    "the delay",
    "the recommendation",
    "the warning",
];

impl Builder<'_> {
    fn say(&mut self, role: Role, text: impl Into<String>, codes: Vec<CodeOccurrence>) {
        self.turns.push(Turn { role, text: text.into(), codes });
    }

    fn code(&mut self, role: Role, code: C, text: impl Into<String>) {
        self.say(role, text, vec![CodeOccurrence::new(code)]);
    }

    fn question(&mut self, topic: &str) {
        let roll: f64 = self.rng.gen();
        let (code, text) = if roll < 0.62 {
            (C::What, format!("What is going on with {topic}?"))
        } else if roll < 0.82 {
            (C::Why, format!("Why did {topic} happen?"))
        } else {
            (C::How, format!("How does {topic} work?"))
        };
        let mut codes = Vec::new();
        if self.rng.gen_bool(0.2) {
            codes.push(CodeOccurrence::with_text(C::QuestionContext, format!("I was looking at {topic}")));
        }
        codes.push(CodeOccurrence::new(code));
        if code != C::What && self.rng.gen_bool(0.3) {
            codes.push(CodeOccurrence::with_text(C::CounterfactualCase, "rather than the usual outcome"));
        }
        if self.rng.gen_bool(0.1) {
            codes.push(CodeOccurrence::with_text(C::Preconception, "I assumed it was random"));
        }
        self.say(Role::Questioner, text, codes);
        // rare clarification request from the explainer
        if self.rng.gen_bool(0.06) {
            self.code(Role::Explainer, C::ExplainerReturnQuestion, "Do you mean the latest one?");
            self.code(Role::Questioner, C::What, format!("Yes, what about the latest {topic}?"));
        }
    }

    fn explanation(&mut self, topic: &str) {
        self.code(Role::Explainer, C::Explanation, format!("Because of how {topic} is configured."));
    }

    /// Question followed by one or more explanations, with optional follow-ups.
    /// Leaves the dialog at EXPLANATION_PRESENTED.
    fn core(&mut self, topic: &str) {
        self.question(topic);
        self.explanation(topic);
        if self.rng.gen_bool(0.5) {
            self.explanation(topic);
        }
        while self.rng.gen_bool(self.plan.return_question_rate) {
            self.code(Role::Questioner, C::ExplaineeReturnQuestion, "And what does that mean?");
            self.explanation(topic);
        }
        if self.rng.gen_bool(self.plan.mid_affirmation_rate) {
            self.code(Role::Questioner, C::ExplaineeAffirmation, "Okay.");
            self.code(Role::Explainer, C::ExplainerAffirmation, "Right.");
            self.question(topic);
            self.explanation(topic);
        }
    }

    /// An argumentation episode, ending at ARG_AFFIRMED. Must start after an affirmation.
    fn argument(&mut self) {
        let opener = if self.rng.gen_bool(0.6) { Role::Questioner } else { Role::Explainer };
        let mut codes = vec![CodeOccurrence::new(if self.rng.gen_bool(0.3) { C::ArgumentS } else { C::Argument })];
        if self.rng.gen_bool(0.4) {
            codes.push(CodeOccurrence::with_text(C::ArgumentContrastCase, "the opposite view"));
        }
        self.say(opener, "I am not sure that is right.", codes);
        if self.rng.gen_bool(0.4) {
            self.code(opener.other(), C::ArgumentC, "But consider the other case.");
            self.code(opener, C::Argument, "That case is rare.");
        }
        self.code(opener.other(), C::ArgumentA, "Fair point.");
    }

    fn dialog(&mut self, ending: Ending) {
        let topic = *TOPICS.choose(self.rng).unwrap();
        let human_human = DialogType::new(self.plan.dialog_type).unwrap().is_human_human();
        let start = self.turns.len();
        let argue = human_human && self.rng.gen_bool(self.plan.argumentation_rate);
        match ending {
            Ending::Explanation => {
                self.core(topic);
                if argue {
                    self.code(Role::Questioner, C::ExplaineeAffirmation, "Okay.");
                    self.argument();
                    self.explanation(topic);
                }
            }
            Ending::ExplaineeAffirmation => {
                self.core(topic);
                self.code(Role::Questioner, C::ExplaineeAffirmation, "Thanks, that helps.");
            }
            Ending::ExplainerAffirmation => {
                self.core(topic);
                self.code(Role::Questioner, C::ExplaineeAffirmation, "Thanks, that helps.");
                self.code(Role::Explainer, C::ExplainerAffirmation, "You're welcome.");
            }
            Ending::Other => {
                let roll: f64 = self.rng.gen();
                if human_human && roll < 0.5 {
                    self.core(topic);
                    self.code(Role::Questioner, C::ExplaineeAffirmation, "Okay.");
                    self.argument();
                } else if roll < 0.8 {
                    self.core(topic);
                    self.code(Role::Questioner, C::ExplaineeReturnQuestion, "Hm, and then?");
                } else {
                    self.question(topic);
                }
            }
        }
        let closer = if self.rng.gen_bool(0.5) { Role::Questioner } else { self.turns.last().unwrap().role };
        if closer == self.turns.last().unwrap().role && self.rng.gen_bool(0.7) {
            self.turns.last_mut().unwrap().codes.push(CodeOccurrence::new(C::QeEnd));
        } else {
            self.code(closer, C::QeEnd, "Bye.");
        }
        self.turns[start].codes.insert(0, CodeOccurrence::new(C::QeStart));
    }
}

fn speakers(dialog_type: u8) -> (Vec<&'static str>, Vec<&'static str>) {
    match dialog_type {
        3 => (vec!["user"], vec!["agent"]),
        4 => (vec!["agent"], vec!["user"]),
        5 => (vec!["asker"], vec!["answerer"]),
        6 => (vec!["p1", "p2", "p3"], vec!["lead"]),
        _ => (vec!["explainee"], vec!["explainer"]),
    }
}

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "synthetic_398.json".into());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut transcripts = Vec::new();
    for plan in &PLANS {
        let mut endings: Vec<Ending> =
            [Ending::Explanation, Ending::ExplaineeAffirmation, Ending::ExplainerAffirmation, Ending::Other]
                .iter()
                .zip(plan.endings)
                .flat_map(|(&e, n)| std::iter::repeat_n(e, n))
                .collect();
        endings.shuffle(&mut rng);
        let total = endings.len();
        let (qs, es) = speakers(plan.dialog_type);
        for t in 0..plan.transcripts {
            let lo = t * total / plan.transcripts;
            let hi = (t + 1) * total / plan.transcripts;
            let mut b = Builder { rng: &mut rng, plan, turns: Vec::new() };
            for &ending in &endings[lo..hi] {
                if b.rng.gen_bool(0.3) {
                    b.say(Role::Questioner, "Hello.", Vec::new());
                }
                b.dialog(ending);
            }
            let utterances = b
                .turns
                .into_iter()
                .enumerate()
                .map(|(i, turn)| {
                    let pool = if turn.role == Role::Questioner { &qs } else { &es };
                    Utterance {
                        index: i as u32,
                        speaker_id: pool[i % pool.len()].to_string(),
                        role: turn.role,
                        text: turn.text,
                        codes: turn.codes,
                    }
                })
                .collect();
            let participants = qs
                .iter()
                .map(|s| Participant { speaker_id: s.to_string(), role: ActorConstraint::Questioner })
                .chain(es.iter().map(|s| Participant { speaker_id: s.to_string(), role: ActorConstraint::Explainer }))
                .collect();
            transcripts.push(Transcript {
                id: format!("S{}-{}", plan.dialog_type, t + 1),
                dialog_type: DialogType::new(plan.dialog_type).unwrap(),
                medium: plan.medium,
                participants,
                utterances,
            });
        }
    }
    let doc = CorpusDocument { corpus_id: "synthetic-398".into(), transcripts };
    std::fs::write(&out, doc.to_canonical_string()).expect("write corpus");
    eprintln!("wrote {out}");
}
