"""JSON schema of detection reports.

A report is an object with the scalar metrics (auroc, aupr_in, aupr_out,
fpr_at_r, r, err), the curves ``roc_points`` ([{threshold, fpr, tpr}])
and ``pr_points`` ([{threshold, precision, recall}]) and a free-form
``metadata`` object (scorer, input hashes, seed).
"""

from rest_framework import serializers

from .models import DetectionReport, PrPoint, RocPoint


class RocPointSerializer(serializers.Serializer):
    threshold = serializers.FloatField()
    fpr = serializers.FloatField(min_value=0.0, max_value=1.0)
    tpr = serializers.FloatField(min_value=0.0, max_value=1.0)


class PrPointSerializer(serializers.Serializer):
    threshold = serializers.FloatField()
    precision = serializers.FloatField(min_value=0.0, max_value=1.0)
    recall = serializers.FloatField(min_value=0.0, max_value=1.0)


class ScoreProvenanceSerializer(serializers.Serializer):
    """Where a score table came from; stored next to it as ``<stem>.meta.json``.

    ``datasets`` maps input file names to their SHA-256; ``model`` is the
    SHA-256 of the fitted model, absent for the language-model score.
    """

    scorer = serializers.ChoiceField(choices=["hm", "mahalanobis", "lm"])
    seed = serializers.IntegerField(min_value=0, allow_null=True)
    layer_tag = serializers.CharField(allow_null=True)
    datasets = serializers.DictField(child=serializers.CharField())
    model = serializers.CharField(allow_null=True)


class DetectionReportSerializer(serializers.Serializer):
    auroc = serializers.FloatField(min_value=0.0, max_value=1.0)
    aupr_in = serializers.FloatField(min_value=0.0, max_value=1.0)
    aupr_out = serializers.FloatField(min_value=0.0, max_value=1.0)
    fpr_at_r = serializers.FloatField(min_value=0.0, max_value=1.0)
    r = serializers.FloatField(min_value=0.0, max_value=1.0)
    err = serializers.FloatField(min_value=0.0, max_value=1.0)
    roc_points = RocPointSerializer(many=True, required=False)
    pr_points = PrPointSerializer(many=True, required=False)
    metadata = serializers.DictField(required=False)

    def create(self, validated_data):
        return DetectionReport(
            auroc=validated_data["auroc"],
            aupr_in=validated_data["aupr_in"],
            aupr_out=validated_data["aupr_out"],
            fpr_at_r=validated_data["fpr_at_r"],
            r=validated_data["r"],
            err=validated_data["err"],
            roc_points=tuple(RocPoint(**p) for p in validated_data.get("roc_points", [])),
            pr_points=tuple(PrPoint(**p) for p in validated_data.get("pr_points", [])),
            metadata=dict(validated_data.get("metadata", {})),
        )
