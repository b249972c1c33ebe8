"""
Benchmark scenarios shipped with the package, loaded by name through
`ScenarioConfig.load`.
"""
