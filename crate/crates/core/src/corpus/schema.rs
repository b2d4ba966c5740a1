use serde::{Deserialize, Serialize};

use crate::protocol::{AttachmentKind, Role, UnknownName};

symbol_enum! {
    /// The eighteen annotation codes of the coding scheme.
    pub enum CodeLabel {
        QeStart => "QE_START",
        QeEnd => "QE_END",
        How => "HOW",
        Why => "WHY",
        What => "WHAT",
        Explanation => "EXPLANATION",
        ExplaineeAffirmation => "EXPLAINEE_AFFIRMATION",
        ExplainerAffirmation => "EXPLAINER_AFFIRMATION",
        QuestionContext => "QUESTION_CONTEXT",
        Preconception => "PRECONCEPTION",
        CounterfactualCase => "COUNTERFACTUAL_CASE",
        Argument => "ARGUMENT",
        ArgumentS => "ARGUMENT_S",
        ArgumentA => "ARGUMENT_A",
        ArgumentC => "ARGUMENT_C",
        ArgumentContrastCase => "ARGUMENT_CONTRAST_CASE",
        ExplainerReturnQuestion => "EXPLAINER_RETURN_QUESTION",
        ExplaineeReturnQuestion => "EXPLAINEE_RETURN_QUESTION",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Dialog,
    QuestionType,
    Explanation,
    Information,
    Argumentation,
    Questions,
}

/// One row of the code table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CodeInfo {
    pub code: CodeLabel,
    /// Name as written by annotators, e.g. `Argument-s`.
    pub display: &'static str,
    pub category: Category,
    pub description: &'static str,
}

const TABLE: [CodeInfo; 18] = {
    use Category::*;
    use CodeLabel as C;
    const fn row(code: CodeLabel, display: &'static str, category: Category, description: &'static str) -> CodeInfo {
        CodeInfo { code, display, category, description }
    }
    [
        row(C::QeStart, "QE start", Dialog, "Explanation dialog start"),
        row(C::QeEnd, "QE end", Dialog, "Explanation dialog end"),
        row(C::How, "How", QuestionType, "How questions"),
        row(C::Why, "Why", QuestionType, "Why questions"),
        row(C::What, "What", QuestionType, "What questions"),
        row(C::Explanation, "Explanation", Explanation, "Explanation given for questions"),
        row(C::ExplaineeAffirmation, "Explainee Affirmation", Explanation, "Explainee acknowledges explanation"),
        row(
            C::ExplainerAffirmation,
            "Explainer Affirmation",
            Explanation,
            "Explainer acknowledges explainee's acknowledgment",
        ),
        row(
            C::QuestionContext,
            "Question context",
            Information,
            "Background to the question provided by the explainee",
        ),
        row(C::Preconception, "Preconception", Information, "Preconceived idea that the explainee has about some fact"),
        row(C::CounterfactualCase, "Counterfactual case", Information, "Counterfactual case of the how/why question"),
        row(C::Argument, "Argument", Argumentation, "Argument presented by explainee or explainer"),
        row(C::ArgumentS, "Argument-s", Argumentation, "An argument that starts the Dialog"),
        row(C::ArgumentA, "Argument-a", Argumentation, "Argument Affirmation by explainee or explainer"),
        row(C::ArgumentC, "Argument-c", Argumentation, "Counter argument"),
        row(C::ArgumentContrastCase, "Argument-contrast case", Argumentation, "Argumentation contrast case"),
        row(C::ExplainerReturnQuestion, "Explainer Return question", Questions, "Clarification question by explainer"),
        row(
            C::ExplaineeReturnQuestion,
            "Explainee Return question",
            Questions,
            "Follow up question asked by explainee",
        ),
    ]
};

pub fn code_schema() -> &'static [CodeInfo] {
    &TABLE
}

impl CodeLabel {
    pub fn info(self) -> &'static CodeInfo {
        &TABLE[self as usize]
    }

    pub fn category(self) -> Category {
        self.info().category
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, CodeLabel::QeStart | CodeLabel::QeEnd)
    }

    /// Role an utterance must have to carry this code, if fixed.
    pub fn required_role(self) -> Option<Role> {
        use CodeLabel::*;
        match self {
            How
            | Why
            | What
            | ExplaineeAffirmation
            | ExplaineeReturnQuestion
            | QuestionContext
            | Preconception
            | CounterfactualCase => Some(Role::Questioner),
            Explanation | ExplainerAffirmation | ExplainerReturnQuestion => Some(Role::Explainer),
            _ => None,
        }
    }

    /// Attachment kind for codes that embed into another move.
    pub fn attachment_kind(self) -> Option<AttachmentKind> {
        match self {
            CodeLabel::QuestionContext => Some(AttachmentKind::QuestionContext),
            CodeLabel::Preconception => Some(AttachmentKind::Preconception),
            CodeLabel::CounterfactualCase => Some(AttachmentKind::CounterfactualCase),
            CodeLabel::ArgumentContrastCase => Some(AttachmentKind::ArgumentContrastCase),
            _ => None,
        }
    }

    pub fn is_argumentation(self) -> bool {
        self.category() == Category::Argumentation
    }

    /// Accepts the upper-snake name or the annotator spelling (`Argument-s`).
    pub fn parse_lenient(name: &str) -> Result<CodeLabel, UnknownName> {
        name.parse()
            .or_else(|e| TABLE.iter().find(|r| r.display.eq_ignore_ascii_case(name.trim())).map(|r| r.code).ok_or(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighteen_codes_in_declaration_order() {
        assert_eq!(code_schema().len(), 18);
        for (i, row) in code_schema().iter().enumerate() {
            assert_eq!(row.code as usize, i);
            assert_eq!(CodeLabel::ALL[i], row.code);
        }
    }

    #[test]
    fn categories_and_descriptions() {
        let r = CodeLabel::ExplainerReturnQuestion.info();
        assert_eq!(r.category, Category::Questions);
        assert_eq!(r.description, "Clarification question by explainer");
        assert_eq!(CodeLabel::QuestionContext.category(), Category::Information);
        assert_eq!(CodeLabel::QeStart.info().description, "Explanation dialog start");
        assert_eq!(CodeLabel::ArgumentContrastCase.category(), Category::Argumentation);
        let per_category = |c| code_schema().iter().filter(|r| r.category == c).count();
        assert_eq!(per_category(Category::Dialog), 2);
        assert_eq!(per_category(Category::QuestionType), 3);
        assert_eq!(per_category(Category::Explanation), 3);
        assert_eq!(per_category(Category::Information), 3);
        assert_eq!(per_category(Category::Argumentation), 5);
        assert_eq!(per_category(Category::Questions), 2);
    }

    #[test]
    fn lenient_names() {
        assert_eq!(CodeLabel::parse_lenient("Argument-s"), Ok(CodeLabel::ArgumentS));
        assert_eq!(CodeLabel::parse_lenient("qe END"), Ok(CodeLabel::QeEnd));
        assert_eq!(CodeLabel::parse_lenient("WHAT"), Ok(CodeLabel::What));
        assert!(CodeLabel::parse_lenient("Shrug").is_err());
    }
}
