"""Script and JDL generation: goldens, round-trip parsing, execution oracle."""

import random
import subprocess
from pathlib import Path

import pytest

from forge import jobmodel as jm, scriptgen
from forge.errors import InvalidWorkflow, UnsupportedDialect

GOLDEN_DIR = Path(__file__).parent / "goldens" / "jdl"


def make_job(elements, requirements=(), app_name="app"):
    return jm.Job(
        id="j000001",
        workflow=jm.Workflow(tuple(elements)),
        requirements=tuple(requirements),
        application=jm.Application(name=app_name, version="1"),
    )


# the five golden fixtures; files under goldens/jdl were written by hand
# from the grammar, not captured from the generator
FIXTURES = {
    "sim-basic": make_job(
        [jm.Executable("sim.sh"), jm.InputFile("a.dat")],
        [jm.Requirement("MinMemoryMB", 512)],
    ),
    "echo-args": make_job(
        [jm.Executable("echo", ("on", "the", "grid"))],
    ),
    "analyze-multi": make_job(
        [jm.Executable("analyze", ("-v", "--mode=fast")),
         jm.InputFile("data1.dat"), jm.InputFile("data2.dat"),
         jm.OutputFile("result.root")],
        [jm.Requirement("MinMemoryMB", 1024),
         jm.Requirement("MinDiskMB", 2048),
         jm.Requirement("Queue", "long")],
    ),
    "wrap-quotes": make_job(
        [jm.Executable("wrap", ('say "hi"',))],
        [jm.Requirement("MinCpuGhz", 2.5)],
    ),
    "count-demo": make_job(
        [jm.Executable("countapp"), jm.Parameter("pattern", "hit"),
         jm.InputFile("data.txt"), jm.OutputFile("counts.hist")],
        [jm.Requirement("Queue", "short")],
    ),
}


class TestJdlGoldens:
    @pytest.mark.parametrize("name", sorted(FIXTURES))
    def test_byte_identical(self, name):
        expected = (GOLDEN_DIR / f"{name}.jdl").read_bytes()
        assert scriptgen.generate_jdl(FIXTURES[name]).encode() == expected

    @pytest.mark.parametrize("name", sorted(FIXTURES))
    def test_round_trip_zero_loss(self, name):
        job = FIXTURES[name]
        parsed = scriptgen.parse_jdl(scriptgen.generate_jdl(job))
        exe = job.workflow.executables[0]
        assert parsed.executable == exe.name
        assert parsed.arguments == " ".join(exe.args)
        inputs = tuple(f.name for f in job.workflow.input_files)
        assert parsed.input_sandbox == ("script.sh",) + inputs
        outputs = tuple(f.name for f in job.workflow.output_files)
        assert parsed.output_sandbox == ("stdout.txt", "stderr.txt") + outputs
        expected_reqs = tuple(
            (r.name, ">=" if r.is_numeric else "==", r.value)
            for r in job.requirements)
        assert parsed.requirements == expected_reqs

    def test_empty_requirements_parse_back_empty(self):
        parsed = scriptgen.parse_jdl(scriptgen.generate_jdl(FIXTURES["echo-args"]))
        assert parsed.requirements == ()

    def test_deterministic(self):
        job = FIXTURES["analyze-multi"]
        assert scriptgen.generate_jdl(job) == scriptgen.generate_jdl(job)
        a = scriptgen.generate_script(job)
        b = scriptgen.generate_script(job)
        assert a.text == b.text

    def test_invalid_workflow_rejected(self):
        bad = make_job([jm.InputFile("a.dat")])
        with pytest.raises(InvalidWorkflow):
            scriptgen.generate_jdl(bad)
        with pytest.raises(InvalidWorkflow):
            scriptgen.generate_script(bad)


class TestScriptGrammar:
    def test_full_script_text(self):
        script = scriptgen.generate_script(FIXTURES["count-demo"], dialect="batchsim")
        assert script.text == (
            "#!/bin/sh\n"
            "#BS queue=short\n"
            "set -e\n"
            'PATH=".:$PATH"\n'
            "export PATH\n"
            'mkdir -p "output"\n'
            'cp "input/data.txt" "data.txt"\n'
            "FORGE_PARAM_PATTERN=hit\n"
            "export FORGE_PARAM_PATTERN\n"
            "countapp\n"
            'mv "counts.hist" "output/counts.hist"\n'
        )
        assert script.declared_inputs == ("data.txt",)
        assert script.declared_outputs == ("counts.hist",)

    def test_default_dialect_has_no_directives(self):
        text = scriptgen.generate_script(FIXTURES["count-demo"]).text
        assert "#BS" not in text

    def test_single_invocation_line(self):
        script = scriptgen.generate_script(make_job([jm.Executable("echo", ("hi",))]))
        invocations = [l for l in script.text.splitlines()
                       if not l.startswith(("#", "set ", "PATH", "export",
                                            "mkdir", "cp ", "mv ", "FORGE_PARAM"))]
        assert invocations == ["echo hi"]

    def test_parameter_export_precedes_invocations(self):
        script = scriptgen.generate_script(make_job(
            [jm.Executable("run"), jm.Parameter("seed", 42)]))
        lines = script.text.splitlines()
        assert lines.index("FORGE_PARAM_SEED=42") < lines.index("run")

    def test_argument_quoting(self):
        script = scriptgen.generate_script(make_job(
            [jm.Executable("echo", ("plain", "two words", "it's"))]))
        assert "echo plain 'two words' 'it'\\''s'" in script.text

    def test_first_failure_stops_the_script(self, tmp_path):
        job = make_job([jm.Executable("false"), jm.Executable("touch", ("made.flag",))])
        script = scriptgen.generate_script(job)
        (tmp_path / "input").mkdir()
        (tmp_path / "run.sh").write_text(script.text)
        proc = subprocess.run(["/bin/sh", "run.sh"], cwd=tmp_path,
                              capture_output=True)
        assert proc.returncode != 0
        assert not (tmp_path / "made.flag").exists()


class TestTranslateRequirements:
    def test_jdl_rules(self):
        reqs = (jm.Requirement("MinMemoryMB", 512), jm.Requirement("Queue", "short"))
        assert scriptgen.translate_requirements(reqs, "jdl") == [
            "other.MinMemoryMB >= 512", 'other.Queue == "short"']

    def test_batchsim_rules(self):
        reqs = (jm.Requirement("Queue", "short"), jm.Requirement("Cost", 3))
        assert scriptgen.translate_requirements(reqs, "batchsim") == [
            "#BS queue=short", "#BS cost=3"]

    def test_empty_set_translates_empty(self):
        assert scriptgen.translate_requirements((), "jdl") == []
        assert scriptgen.translate_requirements((), "batchsim") == []

    def test_unknown_dialect_rejected(self):
        with pytest.raises(UnsupportedDialect):
            scriptgen.translate_requirements((), "slurm")

    def test_injective_on_attribute_sets(self):
        sets = [
            (),
            (jm.Requirement("MinMemoryMB", 512),),
            (jm.Requirement("MinMemoryMB", 1024),),
            (jm.Requirement("Queue", "short"),),
            (jm.Requirement("Queue", "512"),),
            (jm.Requirement("MinMemoryMB", 512), jm.Requirement("Queue", "short")),
        ]
        for dialect in scriptgen.DIALECTS:
            rendered = [tuple(scriptgen.translate_requirements(s, dialect))
                        for s in sets]
            assert len(set(rendered)) == len(sets)


class TestExecutionOracle:
    """Randomized workflows of <= 4 elements over true/false/echo/cat:
    running the script produces exactly the declared outputs iff every
    executable succeeds."""

    def run_script(self, job, tmp_path, staged):
        workdir = tmp_path / "work"
        (workdir / "input").mkdir(parents=True)
        for name in staged:
            (workdir / "input" / name).write_text(f"payload of {name}\n")
        script = scriptgen.generate_script(job)
        (workdir / "run.sh").write_text(script.text)
        return subprocess.run(["/bin/sh", "run.sh"], cwd=workdir,
                              capture_output=True), workdir

    def test_random_workflows(self, tmp_path):
        rng = random.Random(7)
        for trial in range(40):
            staged = [f"in{i}.txt" for i in range(rng.randint(1, 2))]
            elements = [jm.InputFile(n) for n in staged]
            should_fail = False
            for _ in range(rng.randint(1, 4)):
                pick = rng.randrange(4)
                if pick == 0:
                    elements.append(jm.Executable("true"))
                elif pick == 1:
                    elements.append(jm.Executable("false"))
                    should_fail = True
                elif pick == 2:
                    elements.append(jm.Executable("echo", ("hi",)))
                else:
                    elements.append(jm.Executable("cat", (rng.choice(staged),)))
            if not any(e.kind == "Executable" for e in elements):
                elements.append(jm.Executable("true"))
            # pass-through outputs: staged inputs may be declared outputs
            outputs = [n for n in staged if rng.random() < 0.5]
            elements.extend(jm.OutputFile(n) for n in outputs)

            job = make_job(elements)
            proc, workdir = self.run_script(job, tmp_path / f"t{trial}", staged)
            produced = sorted(p.name for p in (workdir / "output").iterdir())
            if should_fail:
                assert proc.returncode != 0, proc.stderr
                assert produced == []
            else:
                assert proc.returncode == 0, proc.stderr
                assert produced == sorted(outputs)
