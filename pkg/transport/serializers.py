from rest_framework import serializers


class LayerEntrySerializer(serializers.Serializer):
    tag = serializers.CharField()
    clean = serializers.CharField()
    adversarial = serializers.CharField()
    train = serializers.CharField(required=False)


class LayersManifestSerializer(serializers.Serializer):
    """``{"layers": [{"tag", "clean", "adversarial", "train"?}, ...]}``; paths relative to the manifest."""

    layers = LayerEntrySerializer(many=True, allow_empty=False)

    def validate_layers(self, value):
        tags = [layer["tag"] for layer in value]
        if len(set(tags)) != len(tags):
            raise serializers.ValidationError("Layer tags must be unique.")
        return value
