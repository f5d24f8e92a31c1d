"""gateway-forge: compile QoS-annotated Science Gateway architectures into
woven models, service manifests and deployment plans."""

from .codegen import Granularity, emit_graph, emit_manifests, render_graph
from .constructs import ConstraintPattern, Construct, ConstructKind, Include, Remove, Rename, Replicate, Scope, Unify
from .deploy import (DeploymentPlan, DeploymentSpec, InfrastructureModel, Node, anti_affinity_groups,
                     plan_deployment, validate_plan)
from .engine import (StageFilter, WeaveReport, apply_action, apply_construct, check_refinement,
                     resolve_constraints, weave)
from .frontend import (elaborate_model, load_construct, load_infrastructure, load_model, parse_construct,
                       parse_infrastructure, parse_model, pretty_print, read_construct, read_infrastructure,
                       read_model, tokenize)
from .library import Library, builtin_library, load_library, lookup
from .model import (AbstractionDef, ArchElement, ArchitectureModel, Attachment, BehaviourBlock, ConnectionPoint,
                    ConstraintAnnotation, Direction, ElementKind, Port, PortPath, ServiceKind, Stage, Statement,
                    Violation, check_well_formed, resolve_path, structurally_isomorphic)
from .style import check_behaviour_refs, check_gateway_style

__version__ = "0.1.0"
