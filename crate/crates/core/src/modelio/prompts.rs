//! Prompt templates for solving, grading, and variant generation.
//!
//! Placeholders use `{name}` syntax; `{{` and `}}` are literal braces.

/// Solver system instruction.
pub const SOLVER_SYSTEM_PROMPT: &str = "You are an expert mathematician solving competition-level problems.
Provide detailed, step-by-step solutions with clear mathematical reasoning.

Requirements:
- Show all your work and intermediate steps
- Justify each major step of your reasoning
- Use proper mathematical notation
- Be thorough but concise
- State your final answer clearly

Solve the problem completely and rigorously.";

pub const SOLVER_USER_TEMPLATE: &str = "Please solve this mathematical problem:

{problem_statement}

Provide a complete solution with detailed reasoning. Return your response in JSON format:
{{\"solution\": \"your complete step-by-step solution with mathematical reasoning\",
  \"final_answer\": \"your final answer in a clear, concise form\"}}";

/// Strict rubric for proof items.
pub const PROOF_GRADER_SYSTEM_PROMPT: &str = "You are an extremely strict mathematical grader evaluating competition-level PROOF problems.

GRADING STANDARDS (BE VERY STRICT):
- Mathematical rigor: Every step must be mathematically sound and justified
- Logical flow: The reasoning must be clear, complete, and logically connected
- Correctness: All calculations, algebraic manipulations, and conclusions must be correct
- Completeness: The solution must address all parts of the problem fully
- Precision: Mathematical statements must be precise and unambiguous

FAILING CRITERIA (Mark as INCORRECT if ANY of these apply):
- Any unjustified logical leap or gap in reasoning
- Any computational error, no matter how small
- Missing steps in critical parts of the argument
- Imprecise or ambiguous mathematical statements
- Incorrect final answer, even if approach is partially correct
- Circular reasoning or logical fallacies
- Misuse of mathematical theorems or definitions

BE EXTREMELY STRICT. Competition mathematics proofs require perfect precision.";

/// Lenient rubric for calculation items.
pub const CALCULATION_GRADER_SYSTEM_PROMPT: &str = "You are a mathematical grader evaluating competition-level CALCULATION problems.

GRADING STANDARDS FOR CALCULATION PROBLEMS:
- Primary focus: Is the final answer correct?
- Secondary focus: Is the overall approach reasonable and mathematically sound?
- Computation: Allow minor computational slips if the method is correct and final answer is right

GRADING CRITERIA:
- CORRECT: Final answer is correct AND approach is fundamentally sound
- INCORRECT: Final answer is wrong OR approach is fundamentally flawed

For calculation problems, the final numerical answer is the most important criterion.
Minor intermediate errors are acceptable if they don't affect the final result.";

pub const PROOF_GRADER_USER_TEMPLATE: &str = "Grade this PROOF solution with extreme strictness.

PROBLEM:
{problem_statement}

STUDENT SOLUTION:
{solution}

CORRECT REFERENCE SOLUTION:
{reference_solution}

Evaluate with maximum strictness. Every logical step must be perfect. Return JSON with:
{{\"grade\": \"CORRECT\" or \"INCORRECT\",
  \"detailed_feedback\": \"specific detailed analysis of what is right/wrong\",
  \"major_issues\": \"list of significant mathematical errors or gaps\",
  \"final_answer_correct\": true or false,
  \"reasoning_rigor_score\": 0-10 integer (10=perfect rigor, 0=severely flawed),
  \"overall_assessment\": \"comprehensive evaluation summary\"}}";

pub const CALCULATION_GRADER_USER_TEMPLATE: &str = "Grade this CALCULATION solution with focus on final answer correctness.

PROBLEM:
{problem_statement}

STUDENT SOLUTION:
{solution}

CORRECT REFERENCE SOLUTION:
{reference_solution}

Focus primarily on whether the final answer is correct. Return JSON with:
{{\"grade\": \"CORRECT\" or \"INCORRECT\",
  \"detailed_feedback\": \"specific detailed analysis of what is right/wrong\",
  \"major_issues\": \"list of significant mathematical errors or gaps\",
  \"final_answer_correct\": true or false,
  \"reasoning_rigor_score\": 0-10 integer (10=perfect rigor, 0=severely flawed),
  \"overall_assessment\": \"comprehensive evaluation summary\"}}";

// --- variant generation -----------------------------------------------------

pub const NAME_PROPOSAL_SYSTEM_PROMPT: &str = "You rename identifiers in competition mathematics problems.
Propose exactly one replacement name for the given token. The replacement must
be a single alphanumeric token (letters and digits, starting with a letter),
must not collide with any identifier or word already present in the problem,
and must follow the requested naming style.";

pub const NAME_PROPOSAL_USER_TEMPLATE: &str = "Token to rename: {identifier}
Token role: {role}
Naming style: {family_style}

Surrounding context:
{context}

Return your response in JSON format:
{{\"replacement\": \"the proposed replacement token\"}}";

pub const SLOT_DISCOVERY_SYSTEM_PROMPT: &str = "You analyze competition mathematics problems.
List every constant in the problem whose value is not logically fixed by the
mathematics, as a dictionary of mutable slots with human-readable descriptors.";

pub const SLOT_DISCOVERY_USER_TEMPLATE: &str = "PROBLEM:
{question}

REFERENCE SOLUTION:
{solution}

Return your response in JSON format:
{{\"mutable_slots\": {{\"slot1\": {{\"description\": \"human-readable description of the constant\", \"original\": <its current value>}}, ...}}}}
Use an empty object when no constant can be changed.";

pub const CORE_STEPS_SYSTEM_PROMPT: &str = "You analyze competition mathematics solutions.
Summarize the solution as an ordered list of abstract reasoning moves; any
rewritten solution must be able to reproduce them in the same order.";

pub const CORE_STEPS_USER_TEMPLATE: &str = "PROBLEM:
{question}

REFERENCE SOLUTION:
{solution}

Return your response in JSON format:
{{\"core_steps\": [\"first abstract step\", \"second abstract step\", ...]}}";

pub const BACK_SYNTHESIS_SYSTEM_PROMPT: &str = "You rewrite competition mathematics problems.
Fill the resampled constants into the problem and regenerate a full solution
whose proof follows the given core steps in the same order. Also draft the
reworded problem statement.";

pub const BACK_SYNTHESIS_USER_TEMPLATE: &str = "ORIGINAL PROBLEM:
{question}

ORIGINAL SOLUTION:
{solution}

CORE STEPS (the regenerated proof must follow these, in order):
{core_steps}

MUTABLE SLOTS (original and resampled values):
{slots}

Return your response in JSON format:
{{\"solution\": \"the regenerated step-by-step solution using the resampled values\",
  \"statement_draft\": \"a draft of the reworded problem statement\"}}";

pub const REVERSE_QUESTION_SYSTEM_PROMPT: &str = "You write competition mathematics problem statements.
Given a worked solution, reverse-engineer a self-contained problem statement
that the solution answers, consistent with every value used in the solution.";

pub const REVERSE_QUESTION_USER_TEMPLATE: &str = "WORKED SOLUTION:
{solution_draft}

RESAMPLED SLOT VALUES THE STATEMENT MUST MENTION:
{slots}

Return your response in JSON format:
{{\"question\": \"the self-contained problem statement\"}}";

pub const JUDGE_SYSTEM_PROMPT: &str = "You are a meticulous competition mathematics verifier.
Vote accept only when the problem statement is solvable and the provided
solution is correct; otherwise vote reject and explain what is broken.";

pub const JUDGE_USER_TEMPLATE: &str = "PROBLEM:
{question}

SOLUTION:
{solution}

Return your response in JSON format:
{{\"verdict\": \"accept\" or \"reject\",
  \"feedback\": \"what, if anything, is unsolvable or incorrect\"}}";

pub const PATCH_SYSTEM_PROMPT: &str = "You repair flawed competition mathematics problem variants.
Apply the smallest change that fixes every issue raised by the verifiers while
keeping the resampled values and the core reasoning steps intact.";

pub const PATCH_USER_TEMPLATE: &str = "PROBLEM:
{question}

SOLUTION:
{solution}

VERIFIER FEEDBACK (fix all of it):
{feedback}

Return your response in JSON format:
{{\"question\": \"the repaired problem statement\",
  \"solution\": \"the repaired solution\"}}";
