"""Program language: AST, parser, printer, interpreter and planners."""

from actattr.lang.ast import Program
from actattr.lang.env import LocalEnv
from actattr.lang.interpreter import DEFAULT_BUDGET, interpret
from actattr.lang.parser import parse
from actattr.lang.planner import Query, parse_query, plan_external, plan_template, template_text
from actattr.lang.primitives import REGISTRY, api_doc
from actattr.lang.printer import print_program

__all__ = [
    "DEFAULT_BUDGET", "LocalEnv", "Program", "Query", "REGISTRY", "api_doc", "interpret", "parse",
    "parse_query", "plan_external", "plan_template", "print_program", "template_text",
]
