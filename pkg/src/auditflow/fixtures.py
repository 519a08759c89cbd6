"""Executable demo audits: a smile-triggered photo booth and a child abuse
screening tool.

Both build complete repositories with deterministic timestamps, so tests
and documentation can replay the full workflow: the booth audit ends in a
conditional greenlight once mitigations are planned, while the screening
audit stalls on an unmitigated catastrophic false-negative risk.
"""

from __future__ import annotations

from pathlib import Path

from .artifacts import ArtifactDocument, ArtifactKind, Stage, make_artifact
from .repository import AuditRepository, TEMPLATE_PRINCIPLES, init_repository
from .risk import RiskRegister, generate_chart_rows, update_fmea_with_tests
from .workflow import advance_stage

SMILE_T = {
    "init": "2026-03-02T09:00:00+00:00",
    "scoping": "2026-03-02T10:00:00+00:00",
    "gate_mapping": "2026-03-02T10:30:00+00:00",
    "mapping": "2026-03-02T11:00:00+00:00",
    "gate_collection": "2026-03-02T11:30:00+00:00",
    "collection": "2026-03-02T12:00:00+00:00",
    "gate_testing": "2026-03-02T12:30:00+00:00",
    "testing": "2026-03-02T13:00:00+00:00",
    "ingested": "2026-03-02T13:10:00+00:00",
    "chart": "2026-03-02T13:20:00+00:00",
    "gate_reflection": "2026-03-02T13:30:00+00:00",
    "reflection": "2026-03-02T14:00:00+00:00",
}

SCREENING_T = {k: v.replace("2026-03-02", "2026-04-06") for k, v in SMILE_T.items()}


def _write(
    repo: AuditRepository,
    kind: ArtifactKind,
    artifact_id: str,
    body: dict,
    *,
    created_at: str,
    status: str = "final",
    version: int = 1,
) -> ArtifactDocument:
    return repo.write_artifact(
        make_artifact(
            kind,
            artifact_id,
            body,
            status=status,
            version=version,
            created_at=created_at,
        )
    )


# ---------------------------------------------------------------------------
# smile booth

def smile_init(path: str | Path) -> AuditRepository:
    return init_repository(
        path,
        "full",
        audit_id="smile-booth",
        product_name="Smile Booth Capture Trigger",
        now=SMILE_T["init"],
    )


def smile_write_scoping(path: str | Path) -> AuditRepository:
    repo = AuditRepository.load(path)
    t = SMILE_T["scoping"]
    _write(
        repo,
        ArtifactKind.PRINCIPLES_DECLARATION,
        "principles",
        {"principles": TEMPLATE_PRINCIPLES},
        created_at=t,
        version=2,
    )
    _write(
        repo,
        ArtifactKind.PRODUCT_REQUIREMENTS_DOC,
        "product-requirements",
        {
            "product_name": "Smile Booth Capture Trigger",
            "requirements": [
                {
                    "id": "R-TRIGGER",
                    "text": "Trigger the booth camera automatically when subjects in frame smile.",
                    "derives_from": [],
                },
                {
                    "id": "R-INCLUSIVE",
                    "text": "Detect smiles reliably across demographic groups and expression styles.",
                    "derives_from": ["justice-fairness-non-discrimination"],
                },
                {
                    "id": "R-CONSENT",
                    "text": "Capture and process face data only after on-screen user consent.",
                    "derives_from": ["privacy"],
                },
                {
                    "id": "R-DISCLOSE",
                    "text": "Disclose automatic capture and data handling to booth users.",
                    "derives_from": ["transparency"],
                },
            ],
        },
        created_at=t,
        version=2,
    )
    _write(
        repo,
        ArtifactKind.ETHICAL_REVIEW,
        "ethical-review",
        {
            "use_case": "Smile-triggered photo capture in physical photo booths",
            "impacted_groups": [
                {"group": "booth customers", "impact": "excluded from capture when their smile is not recognized"},
                {
                    "group": "people with atypical emotional expression",
                    "impact": "autism or cultural norms around smiling lead to systematic exclusion",
                },
                {"group": "minors using booths", "impact": "face data collected from children"},
            ],
            "reviewers": [
                {"name": "N. Adeyemi", "affiliation": "internal ethics board", "standpoint": "internal governance"},
                {"name": "R. Calloway", "affiliation": "accessibility consultancy", "standpoint": "disability advocacy"},
                {"name": "S. Varga", "affiliation": "privacy office", "standpoint": "data protection"},
            ],
            "board_decision": "approve_with_conditions",
            "conditions": [
                "Complete demographic performance testing before launch",
                "Add an explicit consent flow for face processing",
            ],
        },
        created_at=t,
    )
    _write(
        repo,
        ArtifactKind.SOCIAL_IMPACT_ASSESSMENT,
        "social-impact",
        {
            "impact_entries": [
                {
                    "category": "experiences",
                    "description": "Customers with atypical smiles are excluded from automatic capture",
                    "severity": 3,
                },
                {
                    "category": "rights",
                    "description": "Face data is biometric; improper retention infringes privacy rights",
                    "severity": 4,
                },
                {
                    "category": "health_wellbeing",
                    "description": "Repeated misrecognition can embarrass or distress users",
                    "severity": 2,
                },
            ],
            "overall_severity": 4,
        },
        created_at=t,
    )
    return repo


def smile_write_mapping(path: str | Path) -> AuditRepository:
    repo = AuditRepository.load(path)
    t = SMILE_T["mapping"]
    _write(
        repo,
        ArtifactKind.STAKEHOLDER_MAP,
        "stakeholders",
        {
            "stakeholders": [
                {"name": "J. Okafor", "role": "product lead", "contact": "jokafor", "contribution": "scoping and requirements"},
                {"name": "M. Lindqvist", "role": "ML engineer", "contact": "mlindqvist", "contribution": "model integration"},
                {"name": "A. Reyes", "role": "booth operations", "contact": "areyes", "contribution": "deployment context"},
                {"name": "D. Whitfield", "role": "audit lead", "contact": "dwhitfield", "contribution": "audit execution"},
            ]
        },
        created_at=t,
    )
    _write(
        repo,
        ArtifactKind.SYSTEM_MAP,
        "system-map",
        {
            "components": [
                {"id": "camera-feed", "name": "Booth camera feed", "description": "Live frames from the booth camera"},
                {"id": "smile-model", "name": "Smile detection model", "description": "Vendor CNN classifying smiles per face"},
                {"id": "trigger-controller", "name": "Capture trigger", "description": "Fires the shutter when all faces smile"},
                {"id": "consent-screen", "name": "Consent screen", "description": "On-screen opt-in before processing"},
            ],
            "data_flows": [
                {"source": "camera-feed", "target": "smile-model", "description": "frames"},
                {"source": "smile-model", "target": "trigger-controller", "description": "per-face smile scores"},
                {"source": "consent-screen", "target": "trigger-controller", "description": "enable flag"},
            ],
            "covers_requirements": ["R-CONSENT", "R-DISCLOSE"],
        },
        created_at=t,
    )
    _write(
        repo,
        ArtifactKind.DESIGN_HISTORY_REVIEW,
        "design-history-review",
        {
            "documents_reviewed": [
                {"title": "Booth firmware design note", "ref": "docs/firmware-v2", "notes": "frame buffer persists after session"},
                {"title": "Vendor model integration plan", "ref": "docs/integration-plan", "notes": "no bias evaluation on record"},
            ],
            "gaps_identified": ["No prior bias evaluation of the vendor smile model"],
        },
        created_at=t,
    )
    _write(
        repo,
        ArtifactKind.FIELD_STUDY_REPORT,
        "field-study",
        {
            "interviews": [
                {
                    "role": "booth operator",
                    "transcript_ref": "interviews/operator-01",
                    "findings": [
                        "Operators disable auto-capture when it misfires repeatedly",
                        "Customers rarely read on-screen notices",
                    ],
                },
                {
                    "role": "ML engineer",
                    "transcript_ref": "interviews/engineer-02",
                    "findings": [
                        "Training data sourced from a public celebrity face corpus",
                        "No per-group evaluation before this audit",
                    ],
                },
            ]
        },
        created_at=t,
    )
    _write(
        repo,
        ArtifactKind.FMEA_REGISTER,
        "fmea-register",
        {
            "entries": [
                {
                    "id": "FM-SMILE-BIAS",
                    "failure_mode": "Smile detection misses underrepresented demographic groups",
                    "effect": "Customers from underrepresented groups are excluded from automatic capture",
                    "cause": "Training data skewed toward lighter-skinned, younger faces",
                    "severity": 4,
                    "likelihood": 3,
                    "threatened_principles": ["justice-fairness-non-discrimination"],
                    "status": "open",
                    "evidence_refs": ["model-card-smile", "datasheet-celeba"],
                    "rationale": "",
                },
                {
                    "id": "FM-FACE-RETAIN",
                    "failure_mode": "Face frames retained after capture without consent",
                    "effect": "Biometric face data of users stored without their consent",
                    "cause": "Default frame buffer persistence in booth firmware",
                    "severity": 4,
                    "likelihood": 4,
                    "threatened_principles": ["privacy"],
                    "status": "open",
                    "evidence_refs": ["system-map"],
                    "rationale": "",
                },
                {
                    "id": "FM-MISFIRE",
                    "failure_mode": "Camera triggers on non-smile expressions",
                    "effect": "Unwanted photos captured and customer dissatisfaction",
                    "cause": "Low precision in low-light frames",
                    "severity": 2,
                    "likelihood": 3,
                    "threatened_principles": ["safety-non-maleficence"],
                    "status": "open",
                    "evidence_refs": ["field-study"],
                    "rationale": "",
                },
            ]
        },
        created_at=t,
        status="draft",
    )
    return repo


def smile_write_collection(path: str | Path) -> AuditRepository:
    repo = AuditRepository.load(path)
    t = SMILE_T["collection"]
    _write(
        repo,
        ArtifactKind.DESIGN_CHECKLIST,
        "design-checklist",
        {
            "items": [
                {
                    "id": "CL-MC",
                    "prompt": "Describe the intended use documented for the smile model",
                    "expected_artifact": "ModelCard",
                    "response": "Model card limits the model to booth capture triggering",
                    "satisfied": "yes",
                    "justification": "",
                },
                {
                    "id": "CL-DS",
                    "prompt": "Describe the provenance and demographics of the training data",
                    "expected_artifact": "Datasheet",
                    "response": "Datasheet records scraped celebrity corpus with skewed slices",
                    "satisfied": "yes",
                    "justification": "",
                },
                {
                    "id": "CL-CONSENT",
                    "prompt": "Explain how user consent is obtained before face processing",
                    "response": "Consent screen design reviewed with operations",
                    "satisfied": "yes",
                    "justification": "",
                },
                {
                    "id": "CL-EVAL",
                    "prompt": "What evaluation data supports the vendor model claims",
                    "response": "Vendor holdout summary attached to the model card",
                    "satisfied": "yes",
                    "justification": "",
                },
                {
                    "id": "CL-HW",
                    "prompt": "Describe hardware failure interlocks for the booth camera",
                    "response": "",
                    "satisfied": "n/a",
                    "justification": "Hardware interlocks are owned by the booth vendor, outside audit scope",
                },
            ]
        },
        created_at=t,
    )
    _write(
        repo,
        ArtifactKind.MODEL_CARD,
        "model-card-smile",
        {
            "model_name": "smile-detect-v3",
            "intended_use": "Detect whether every face in the booth frame is smiling, solely to trigger photo capture; not for affect or identity inference",
            "out_of_scope_uses": ["Emotion recognition", "Identity verification", "Surveillance"],
            "evaluation_data": "Vendor holdout set plus per-group slices from the public celebrity corpus",
            "performance_by_group": [
                {"group": "lighter-skin", "metric_name": "recall", "value": 0.94},
                {"group": "darker-skin", "metric_name": "recall", "value": 0.72},
                {"group": "age-46-plus", "metric_name": "recall", "value": 0.81},
            ],
            "limitations": "Recall drops for underrepresented groups and low-light frames",
            "covers_requirements": ["R-TRIGGER", "R-INCLUSIVE"],
        },
        created_at=t,
    )
    _write(
        repo,
        ArtifactKind.DATASHEET,
        "datasheet-celeba",
        {
            "dataset_name": "public celebrity faces corpus",
            "collection_process": "Images scraped from public web profiles of celebrities, labeled by vendor annotators",
            "ethical_review_conducted": "no",
            "relates_to_people": "yes",
            "demographic_breakdown": [
                {
                    "axis": "gender",
                    "groups": [
                        {"label": "female", "fraction": 0.581},
                        {"label": "male", "fraction": 0.42},
                    ],
                },
                {
                    "axis": "skin type",
                    "groups": [
                        {"label": "lighter", "fraction": 0.142},
                        {"label": "darker", "fraction": 0.858},
                    ],
                },
                {
                    "axis": "age",
                    "groups": [
                        {"label": "0-45", "fraction": 0.778},
                        {"label": "over-46", "fraction": 0.221},
                    ],
                },
            ],
            "covers_requirements": ["R-INCLUSIVE"],
        },
        created_at=t,
    )
    return repo


def smile_write_testing(path: str | Path) -> AuditRepository:
    repo = AuditRepository.load(path)
    _write(
        repo,
        ArtifactKind.ADVERSARIAL_TESTING_REPORT,
        "adversarial-tests",
        {
            "test_cases": [
                {
                    "id": "TC-BIAS",
                    "target": "FM-SMILE-BIAS",
                    "description": "Counterfactual smile prompts across demographic slices",
                    "trials": 200,
                    "failures": 60,
                    "notes": "Failures concentrate on darker-skin and older slices",
                },
                {
                    "id": "TC-RETAIN",
                    "target": "FM-FACE-RETAIN",
                    "description": "Probe for frame persistence after session end",
                    "trials": 20,
                    "failures": 20,
                    "notes": "Buffer kept frames in every probe",
                },
                {
                    "id": "TC-MISFIRE",
                    "target": "FM-MISFIRE",
                    "description": "Non-smile grimace and speech frames",
                    "trials": 150,
                    "failures": 9,
                    "notes": "",
                },
            ]
        },
        created_at=SMILE_T["testing"],
    )
    return repo


def smile_ingest_tests(path: str | Path) -> AuditRepository:
    """Fold the adversarial results into a new register version and publish
    the matching risk chart."""
    repo = AuditRepository.load(path)
    register_doc = repo.register_doc()
    report = repo.get("adversarial-tests")
    register, _ = update_fmea_with_tests(
        RiskRegister.from_artifact(register_doc), report, repo.risk_matrix()
    )
    _write(
        repo,
        ArtifactKind.FMEA_REGISTER,
        register_doc.id,
        register.to_body(),
        created_at=SMILE_T["ingested"],
        status="draft",
        version=register_doc.meta.version + 1,
    )
    _write(
        repo,
        ArtifactKind.ETHICAL_RISK_CHART,
        "risk-chart",
        {"rows": generate_chart_rows(register, repo.risk_matrix())},
        created_at=SMILE_T["chart"],
    )
    return repo


def smile_write_reflection(path: str | Path) -> AuditRepository:
    repo = AuditRepository.load(path)
    t = SMILE_T["reflection"]
    register_doc = repo.register_doc()
    _write(
        repo,
        ArtifactKind.FMEA_REGISTER,
        register_doc.id,
        register_doc.body,
        created_at=t,
        status="final",
        version=register_doc.meta.version + 1,
    )
    _write(
        repo,
        ArtifactKind.REMEDIATION_PLAN,
        "remediation-plan",
        {
            "items": [
                {
                    "id": "RM-RETRAIN",
                    "fmea_id": "FM-SMILE-BIAS",
                    "action": "Retrain the smile model with added samples of underrepresented groups",
                    "owner": "ml-team",
                    "status": "planned",
                    "notes": "",
                },
                {
                    "id": "RM-OPTIN",
                    "fmea_id": "FM-FACE-RETAIN",
                    "action": "Require on-screen opt-in with user permission before enabling the model-controlled trigger",
                    "owner": "product-team",
                    "status": "planned",
                    "notes": "trigger disabled by default",
                },
                {
                    "id": "RM-DISCLAIM",
                    "fmea_id": "FM-FACE-RETAIN",
                    "action": "Show a privacy disclaimer covering face data storage and consent",
                    "owner": "product-team",
                    "status": "planned",
                    "notes": "",
                },
                {
                    "id": "RM-THRESH",
                    "fmea_id": "FM-MISFIRE",
                    "action": "Raise the trigger confidence threshold for low-light frames",
                    "owner": "ml-team",
                    "status": "planned",
                    "notes": "",
                },
            ]
        },
        created_at=t,
    )
    return repo


def build_smile_repo(path: str | Path, *, advance: bool = True) -> AuditRepository:
    """Full booth audit. With ``advance`` the workflow is walked through all
    four gates, ready for report compilation at Reflection."""
    smile_init(path)
    smile_write_scoping(path)
    if advance:
        repo = AuditRepository.load(path)
        advance_stage(repo, Stage.MAPPING, timestamp=SMILE_T["gate_mapping"])
    smile_write_mapping(path)
    if advance:
        repo = AuditRepository.load(path)
        advance_stage(repo, Stage.ARTIFACT_COLLECTION, timestamp=SMILE_T["gate_collection"])
    smile_write_collection(path)
    if advance:
        repo = AuditRepository.load(path)
        advance_stage(repo, Stage.TESTING, timestamp=SMILE_T["gate_testing"])
    smile_write_testing(path)
    smile_ingest_tests(path)
    if advance:
        repo = AuditRepository.load(path)
        advance_stage(repo, Stage.REFLECTION, timestamp=SMILE_T["gate_reflection"])
    smile_write_reflection(path)
    return AuditRepository.load(path)


# ---------------------------------------------------------------------------
# child abuse screening

def build_screening_repo(path: str | Path, *, advance: bool = True) -> AuditRepository:
    """Full screening audit; stalls on the unmitigated false-negative risk."""
    t = SCREENING_T
    init_repository(
        path,
        "full",
        audit_id="screening",
        product_name="Child Abuse Screening Tool",
        now=t["init"],
    )
    repo = AuditRepository.load(path)
    _write(repo, ArtifactKind.PRINCIPLES_DECLARATION, "principles", {"principles": TEMPLATE_PRINCIPLES}, created_at=t["scoping"], version=2)
    _write(
        repo,
        ArtifactKind.PRODUCT_REQUIREMENTS_DOC,
        "product-requirements",
        {
            "product_name": "Child Abuse Screening Tool",
            "requirements": [
                {
                    "id": "R-SCREEN",
                    "text": "Score incoming referral cases for abuse risk to support case worker triage.",
                    "derives_from": ["safety-non-maleficence"],
                },
                {
                    "id": "R-EXPLAIN",
                    "text": "Provide case workers an explanation for each risk score.",
                    "derives_from": ["transparency"],
                },
                {
                    "id": "R-JUVDATA",
                    "text": "Handle juvenile records under strict access and retention rules.",
                    "derives_from": ["privacy"],
                },
            ],
        },
        created_at=t["scoping"],
        version=2,
    )
    _write(
        repo,
        ArtifactKind.ETHICAL_REVIEW,
        "ethical-review",
        {
            "use_case": "Screening referral calls for child abuse risk",
            "impacted_groups": [
                {"group": "children in referred families", "impact": "missed detection leaves a child in danger"},
                {"group": "families under investigation", "impact": "false alarms can separate families that could recover"},
                {"group": "case workers", "impact": "alert volume shapes workload and judgment"},
            ],
            "reviewers": [
                {"name": "P. Haruna", "affiliation": "county child services", "standpoint": "child welfare practice"},
                {"name": "L. Dominguez", "affiliation": "civil rights clinic", "standpoint": "family civil rights"},
                {"name": "T. Brandt", "affiliation": "internal counsel", "standpoint": "legal compliance"},
            ],
            "board_decision": "approve_with_conditions",
            "conditions": [
                "Scores may support but never replace case worker judgment",
                "Continuing review required for any deployment decision",
            ],
        },
        created_at=t["scoping"],
    )
    _write(
        repo,
        ArtifactKind.SOCIAL_IMPACT_ASSESSMENT,
        "social-impact",
        {
            "impact_entries": [
                {
                    "category": "health_wellbeing",
                    "description": "A missed high-risk case leaves a child in an unsafe home",
                    "severity": 5,
                },
                {
                    "category": "rights",
                    "description": "Wrongful separation infringes family integrity rights",
                    "severity": 5,
                },
                {
                    "category": "community",
                    "description": "Disproportionate scrutiny of poor families erodes trust in services",
                    "severity": 4,
                },
            ],
            "overall_severity": 5,
        },
        created_at=t["scoping"],
    )
    if advance:
        advance_stage(AuditRepository.load(path), Stage.MAPPING, timestamp=t["gate_mapping"])

    repo = AuditRepository.load(path)
    _write(
        repo,
        ArtifactKind.STAKEHOLDER_MAP,
        "stakeholders",
        {
            "stakeholders": [
                {"name": "E. Nwosu", "role": "client project lead", "contact": "enwosu", "contribution": "requirements and delivery"},
                {"name": "K. Saari", "role": "data scientist", "contact": "ksaari", "contribution": "model development"},
                {"name": "V. Aldana", "role": "county liaison", "contact": "valdana", "contribution": "deployment context"},
                {"name": "D. Whitfield", "role": "audit lead", "contact": "dwhitfield", "contribution": "audit execution"},
            ]
        },
        created_at=t["mapping"],
    )
    _write(
        repo,
        ArtifactKind.SYSTEM_MAP,
        "system-map",
        {
            "components": [
                {"id": "referral-intake", "name": "Referral intake", "description": "Call center records referral details"},
                {"id": "risk-model", "name": "Risk scoring model", "description": "Gradient boosted model over county records"},
                {"id": "triage-queue", "name": "Triage queue", "description": "Ranked case list for case workers"},
                {"id": "records-store", "name": "Juvenile records store", "description": "Historical county records"},
            ],
            "data_flows": [
                {"source": "referral-intake", "target": "risk-model", "description": "referral features"},
                {"source": "records-store", "target": "risk-model", "description": "history features"},
                {"source": "risk-model", "target": "triage-queue", "description": "risk scores"},
            ],
            "covers_requirements": ["R-SCREEN", "R-JUVDATA"],
        },
        created_at=t["mapping"],
    )
    _write(
        repo,
        ArtifactKind.DESIGN_HISTORY_REVIEW,
        "design-history-review",
        {
            "documents_reviewed": [
                {"title": "Feature engineering log", "ref": "docs/features-v4", "notes": "uses benefit receipt as a proxy feature"},
                {"title": "Label definition memo", "ref": "docs/labels", "notes": "re-referral within 2 years treated as ground truth"},
            ],
            "gaps_identified": [
                "No analysis of label bias against poor families",
                "No access policy for juvenile records in the training store",
            ],
        },
        created_at=t["mapping"],
    )
    _write(
        repo,
        ArtifactKind.FIELD_STUDY_REPORT,
        "field-study",
        {
            "interviews": [
                {
                    "role": "case worker",
                    "transcript_ref": "interviews/caseworker-01",
                    "findings": [
                        "Workers distrust scores that contradict their intake impression",
                        "High alert volume pushes workers to skim low scores",
                    ],
                },
                {
                    "role": "data scientist",
                    "transcript_ref": "interviews/datascientist-02",
                    "findings": [
                        "Benefit receipt correlates with surveillance, not abuse",
                        "False negative rate never evaluated on fatal cases",
                    ],
                },
            ]
        },
        created_at=t["mapping"],
    )
    _write(
        repo,
        ArtifactKind.FMEA_REGISTER,
        "fmea-register",
        {
            "entries": [
                {
                    "id": "FM-FALSE-NEG",
                    "failure_mode": "Model scores a truly dangerous case as low risk",
                    "effect": "A dead or seriously injured child who could have been rescued",
                    "cause": "Imbalanced labels and proxy features that miss danger signals",
                    "severity": 5,
                    "likelihood": 3,
                    "threatened_principles": ["safety-non-maleficence"],
                    "status": "open",
                    "evidence_refs": ["field-study", "design-history-review"],
                    "rationale": "",
                },
                {
                    "id": "FM-FALSE-POS",
                    "failure_mode": "Model flags safe families as high risk",
                    "effect": "Family separation and staff overwhelmed by false alarms",
                    "cause": "Proxy variables correlated with poverty",
                    "severity": 4,
                    "likelihood": 3,
                    "threatened_principles": ["justice-fairness-non-discrimination", "safety-non-maleficence"],
                    "status": "open",
                    "evidence_refs": ["design-history-review"],
                    "rationale": "",
                },
                {
                    "id": "FM-JUV-PRIV",
                    "failure_mode": "Juvenile records exposed beyond authorized case workers",
                    "effect": "Sensitive juvenile data disclosed without consent",
                    "cause": "Broad database permissions on the records store",
                    "severity": 4,
                    "likelihood": 4,
                    "threatened_principles": ["privacy"],
                    "status": "open",
                    "evidence_refs": ["system-map"],
                    "rationale": "",
                },
            ]
        },
        created_at=t["mapping"],
        status="draft",
    )
    if advance:
        advance_stage(AuditRepository.load(path), Stage.ARTIFACT_COLLECTION, timestamp=t["gate_collection"])

    repo = AuditRepository.load(path)
    _write(
        repo,
        ArtifactKind.DESIGN_CHECKLIST,
        "design-checklist",
        {
            "items": [
                {
                    "id": "CL-MC",
                    "prompt": "Describe the intended use documented for the risk model",
                    "expected_artifact": "ModelCard",
                    "response": "Model card restricts scores to triage support",
                    "satisfied": "yes",
                    "justification": "",
                },
                {
                    "id": "CL-DS",
                    "prompt": "Describe how the referral history data was collected and labeled",
                    "expected_artifact": "Datasheet",
                    "response": "Datasheet records county files and label defects",
                    "satisfied": "yes",
                    "justification": "",
                },
                {
                    "id": "CL-ACCESS",
                    "prompt": "Explain who can access juvenile records during scoring",
                    "response": "Access policy drafted with county counsel",
                    "satisfied": "yes",
                    "justification": "",
                },
            ]
        },
        created_at=t["collection"],
    )
    _write(
        repo,
        ArtifactKind.MODEL_CARD,
        "model-card-screening",
        {
            "model_name": "referral-risk-v1",
            "intended_use": "Rank referral cases for triage support by trained case workers; never an autonomous removal decision",
            "out_of_scope_uses": ["Automated case closure", "Criminal proceedings"],
            "evaluation_data": "County referrals 2012-2019 with two-year outcome labels",
            "performance_by_group": [
                {"group": "benefit-recipients", "metric_name": "false_positive_rate", "value": 0.31},
                {"group": "non-recipients", "metric_name": "false_positive_rate", "value": 0.18},
                {"group": "all", "metric_name": "recall", "value": 0.74},
            ],
            "limitations": "Labels proxy re-referral, not harm; poverty-correlated features inflate scores for poor families",
            "covers_requirements": ["R-SCREEN", "R-EXPLAIN"],
        },
        created_at=t["collection"],
    )
    _write(
        repo,
        ArtifactKind.DATASHEET,
        "referral-history-data",
        {
            "dataset_name": "county referral history",
            "collection_process": "County referral records 2012-2019 with outcomes entered by case workers",
            "ethical_review_conducted": "yes",
            "relates_to_people": "yes",
            "demographic_breakdown": [
                {
                    "axis": "household income band",
                    "groups": [
                        {"label": "low", "fraction": 0.45},
                        {"label": "middle", "fraction": 0.30},
                        {"label": "high", "fraction": 0.25},
                    ],
                }
            ],
            "covers_requirements": ["R-JUVDATA"],
        },
        created_at=t["collection"],
    )
    if advance:
        advance_stage(AuditRepository.load(path), Stage.TESTING, timestamp=t["gate_testing"])

    repo = AuditRepository.load(path)
    _write(
        repo,
        ArtifactKind.ADVERSARIAL_TESTING_REPORT,
        "adversarial-tests",
        {
            "test_cases": [
                {
                    "id": "TC-PROFILES",
                    "target": "FM-FALSE-NEG",
                    "description": "Replay of diverse synthetic user profiles with known dangerous outcomes",
                    "trials": 500,
                    "failures": 60,
                    "notes": "Misses concentrate on cases without prior county contact",
                },
                {
                    "id": "TC-TREATED",
                    "target": "FM-FALSE-POS",
                    "description": "Profiles treated on poverty-correlated variables",
                    "trials": 400,
                    "failures": 88,
                    "notes": "Scores rise when benefit receipt is toggled on",
                },
                {
                    "id": "TC-ACCESS",
                    "target": "FM-JUV-PRIV",
                    "description": "Access probes against the records store",
                    "trials": 40,
                    "failures": 10,
                    "notes": "Read access granted to unassigned staff accounts",
                },
            ]
        },
        created_at=t["testing"],
    )
    register_doc = repo.register_doc()
    register, _ = update_fmea_with_tests(
        RiskRegister.from_artifact(register_doc), repo.get("adversarial-tests"), repo.risk_matrix()
    )
    _write(
        repo,
        ArtifactKind.FMEA_REGISTER,
        register_doc.id,
        register.to_body(),
        created_at=t["ingested"],
        status="draft",
        version=register_doc.meta.version + 1,
    )
    _write(
        repo,
        ArtifactKind.ETHICAL_RISK_CHART,
        "risk-chart",
        {"rows": generate_chart_rows(register, repo.risk_matrix())},
        created_at=t["chart"],
    )
    if advance:
        advance_stage(AuditRepository.load(path), Stage.REFLECTION, timestamp=t["gate_reflection"])

    repo = AuditRepository.load(path)
    register_doc = repo.register_doc()
    _write(
        repo,
        ArtifactKind.FMEA_REGISTER,
        register_doc.id,
        register_doc.body,
        created_at=t["reflection"],
        status="final",
        version=register_doc.meta.version + 1,
    )
    # No remediation item exists yet for FM-FALSE-NEG: the team has not found
    # a mitigation it can commit to, so the verdict stalls.
    _write(
        repo,
        ArtifactKind.REMEDIATION_PLAN,
        "remediation-plan",
        {
            "items": [
                {
                    "id": "RM-REVIEW",
                    "fmea_id": "FM-FALSE-POS",
                    "action": "Require human review before any family contact triggered by a score",
                    "owner": "county",
                    "status": "planned",
                    "notes": "",
                },
                {
                    "id": "RM-ACCESS",
                    "fmea_id": "FM-JUV-PRIV",
                    "action": "Restrict record access to assigned case workers with audit logging",
                    "owner": "client-it",
                    "status": "planned",
                    "notes": "",
                },
            ]
        },
        created_at=t["reflection"],
    )
    return AuditRepository.load(path)
