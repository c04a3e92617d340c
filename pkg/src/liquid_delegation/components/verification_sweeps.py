from typing import List, Optional

import dagster as dg

from liquid_delegation.errors import DelegationError
from liquid_delegation.formats import parse_graph_model, parse_points, parse_profile
from liquid_delegation.resources.solver_resource import SolverSettings
from liquid_delegation.resources.source_resource import InputSourceResource
from liquid_delegation.solving import solve_problem
from liquid_delegation.sweeps import SWEEP_KINDS, run_sweep


class SweepConfig(dg.Model):
    """One randomised or exhaustive cross-check."""

    name: str
    kind: str
    trials: int = 100
    max_voters: int = 8
    seed: Optional[int] = None
    variant: Optional[str] = None


class ProfileCheckConfig(dg.Model):
    """A stored profile solved on every materialisation."""

    location: str
    problem: str = "eq"
    profile_class: str = "auto"
    model: Optional[str] = None
    expect_status: Optional[str] = None
    expect_value: Optional[int] = None


class VerificationSweepsComponent(dg.Component, dg.Model, dg.Resolvable):
    """Materialises solver cross-checks and stored-profile checks as assets."""

    sweeps: List[SweepConfig] = []
    profile_checks: List[ProfileCheckConfig] = []
    group_name: str = "verification_sweeps"

    def build_defs(self, context: dg.ComponentLoadContext) -> dg.Definitions:
        sweep_assets = [self._sweep_asset(config) for config in self.sweeps]

        @dg.asset(
            name="stored_profile_checks",
            group_name=self.group_name,
            kinds={"python", "verification"},
            owners=["team:data"],
        )
        def profile_checks(
            context: dg.AssetExecutionContext,
            solver: SolverSettings,
            source: InputSourceResource,
        ) -> dg.MaterializeResult:
            """Solve every configured profile and compare against the expected answer."""
            results = []
            mismatches = []
            for check in self.profile_checks:
                context.log.info(f"Checking {check.location} ({check.problem})")
                try:
                    document = parse_profile(source.read_text(check.location))
                    instance = None
                    if check.model:
                        text = source.read_text(check.model)
                        instance = parse_points(text) if check.model.endswith(".points") else parse_graph_model(text)
                    result = solve_problem(
                        document.profile,
                        check.problem,
                        cls=check.profile_class,
                        settings=solver,
                        instance=instance,
                        partial=document.partial,
                    )
                except DelegationError as e:
                    context.log.error(f"Failed to check {check.location}: {e}")
                    mismatches.append(f"{check.location}: {e}")
                    continue

                results.append(f"{check.location} {check.problem}: {result.status} value={result.value} gurus={result.gurus}")
                if check.expect_status is not None and result.status != check.expect_status:
                    mismatches.append(f"{check.location}: status {result.status}, expected {check.expect_status}")
                if check.expect_value is not None and result.value != check.expect_value:
                    mismatches.append(f"{check.location}: value {result.value}, expected {check.expect_value}")

            if mismatches:
                raise dg.Failure(
                    description=f"{len(mismatches)} stored profile checks failed",
                    metadata={"mismatches": mismatches, "results": results},
                )
            return dg.MaterializeResult(metadata={"checked": len(results), "results": results})

        @dg.asset(
            name="verification_summary",
            group_name=self.group_name,
            kinds={"python", "summary"},
            owners=["team:data"],
            deps=[*sweep_assets, profile_checks],
        )
        def verification_summary(context: dg.AssetExecutionContext) -> dg.MaterializeResult:
            """Which sweeps and stored checks this deployment runs."""
            total_trials = sum(config.trials for config in self.sweeps)
            context.log.info(f"{len(self.sweeps)} sweeps ({total_trials} trials) and {len(self.profile_checks)} stored profiles passed")
            return dg.MaterializeResult(
                metadata={
                    "sweeps": [f"{config.name} ({config.kind})" for config in self.sweeps],
                    "total_trials": total_trials,
                    "profile_checks": [check.location for check in self.profile_checks],
                }
            )

        return dg.Definitions(assets=[*sweep_assets, profile_checks, verification_summary])

    def _sweep_asset(self, config: SweepConfig) -> dg.AssetsDefinition:
        if config.kind not in SWEEP_KINDS:
            raise ValueError(f"sweep {config.name}: unknown kind {config.kind!r}")

        @dg.asset(
            name=f"sweep_{config.name.replace('-', '_')}",
            group_name=self.group_name,
            kinds={"python", "verification"},
            owners=["team:data"],
            description=f"{config.kind} sweep over up to {config.max_voters} voters",
        )
        def sweep(context: dg.AssetExecutionContext, solver: SolverSettings) -> dg.MaterializeResult:
            seed = solver.default_seed if config.seed is None else config.seed
            context.log.info(f"Running {config.kind} sweep {config.name} with seed {seed}")
            report = run_sweep(config.kind, config.trials, config.max_voters, seed, variant=config.variant, settings=solver)
            metadata = {
                "trials": report.trials,
                "failures": report.failures,
                "elapsed_seconds": round(report.elapsed, 3),
                "seed": seed,
                "kernel_vertex_bound": solver.kernel_vertex_bound,
                "findings": list(report.findings[:50]),
            }
            if not report.ok:
                raise dg.Failure(description=f"sweep {config.name} found {report.failures} failures", metadata=metadata)
            return dg.MaterializeResult(metadata=metadata)

        return sweep
